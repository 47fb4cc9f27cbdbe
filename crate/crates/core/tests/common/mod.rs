//! Test-side oracles. Nothing here calls the library's own verifiers.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::path::PathBuf;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use prudens::beliefs::{ConditioningFamily, ExplicitCPS, PriorCNPS};
use prudens::best_reply::Optimality;
use prudens::dominance::{justifying_full_support_measure, weakly_dominated, MixedStrategy};
use prudens::game_core::{Game, ProductRestriction, StrategicForm};
use prudens::game_dsl::{elaborate, parse, GameDoc};
use prudens::hyperreal::{integer, Hyperreal, LeadingDegree, Rational};
use prudens::layers::{LayerKind, Requirement};
use prudens::procedures::Failure;
use prudens::random::{generate_with, rng_for, Bounds};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub struct CorpusGame {
    pub name: String,
    pub doc: GameDoc,
    pub game: Game,
}

pub fn corpus() -> Vec<CorpusGame> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "seqgame"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).expect("readable");
            let doc = parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            let game = elaborate(&doc).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            CorpusGame { name: p.file_stem().unwrap().to_string_lossy().into_owned(), doc, game }
        })
        .collect()
}

pub fn corpus_game(name: &str) -> CorpusGame {
    corpus().into_iter().find(|g| g.name == name).unwrap_or_else(|| panic!("no corpus game {name}"))
}

pub fn fuzz_doc(seed: u64, index: u64) -> GameDoc {
    generate_with(&mut rng_for(seed, index), Bounds::default())
}

fn r(v: i64) -> Rational {
    integer(v)
}

/// Substitution check of a dominance certificate.
pub fn check_dominance(form: &StrategicForm<'_>, candidates: &[usize], against: &[usize], target: usize, sigma: &MixedStrategy) -> bool {
    let player = sigma.owner;
    let total: Rational = sigma.weights.iter().map(|(_, w)| w.clone()).sum();
    if total != Rational::one() || sigma.weights.iter().any(|(s, w)| w.is_negative() || !candidates.contains(s)) {
        return false;
    }
    let mut strict = false;
    for &x in against {
        let mixed: Rational = sigma.weights.iter().map(|(s, w)| w * form.payoff(player, *s, x)).sum();
        match mixed.cmp(form.payoff(player, target, x)) {
            Ordering::Less => return false,
            Ordering::Greater => strict = true,
            Ordering::Equal => {}
        }
    }
    strict
}

/// Substitution check of a justifier: positive exactly on `support`, a
/// distribution, and `s` optimal among all of `S_i`.
pub fn check_justifier(form: &StrategicForm<'_>, player: usize, support: &[usize], s: usize, nu: &[Rational]) -> bool {
    if nu.len() != form.num_coprofiles(player) || nu.iter().cloned().sum::<Rational>() != Rational::one() {
        return false;
    }
    for (x, v) in nu.iter().enumerate() {
        if v.is_negative() || v.is_positive() != support.contains(&x) {
            return false;
        }
    }
    let value = |t: usize| -> Rational { (0..nu.len()).map(|x| &nu[x] * form.payoff(player, t, x)).sum() };
    let own = value(s);
    (0..form.size(player)).all(|t| value(t) <= own)
}

/// Exact solution of a square system, `None` if singular.
fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&row| !a[row][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row != col && !a[row][col].is_zero() {
                let f = &a[row][col] / &a[col][col];
                for k in col..n {
                    let d = &f * &a[col][k];
                    a[row][k] -= d;
                }
                let d = &f * &b[col];
                b[row] -= d;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Whether vertex enumeration is affordable for `candidates × against`.
pub fn vertex_oracle_fits(candidates: usize, against: usize) -> bool {
    candidates >= 1 && binomial(candidates + against, candidates - 1) <= 500
}

/// Weak dominance by a mixture, decided by enumerating the vertices of
/// `{σ ∈ Δ(C) : Σ_k σ_k (u_k - u_s) ≥ 0}` and maximizing the total slack.
pub fn dominated_by_vertices(rows: &[Vec<Rational>], target: &[Rational]) -> bool {
    let n = rows.len();
    let m = target.len();
    let diff: Vec<Vec<Rational>> = rows.iter().map(|row| row.iter().zip(target).map(|(a, b)| a - b).collect()).collect();
    let objective: Vec<Rational> = diff.iter().map(|d| d.iter().cloned().sum()).collect();
    // Inequalities: σ_k ≥ 0 (k < n), then Σ_k σ_k diff[k][x] ≥ 0.
    let constraint = |c: usize| -> Vec<Rational> {
        if c < n {
            (0..n).map(|k| if k == c { r(1) } else { r(0) }).collect()
        } else {
            (0..n).map(|k| diff[k][c - n].clone()).collect()
        }
    };
    let mut best: Option<Rational> = None;
    combinations(n + m, n - 1, |tight| {
        let mut a = vec![vec![r(1); n]];
        let mut b = vec![r(1)];
        for &c in tight {
            a.push(constraint(c));
            b.push(r(0));
        }
        let Some(sigma) = solve(a, b) else { return };
        let feasible = sigma.iter().all(|v| !v.is_negative())
            && (0..m).all(|x| !(0..n).map(|k| &sigma[k] * &diff[k][x]).sum::<Rational>().is_negative());
        if feasible {
            let value: Rational = (0..n).map(|k| &sigma[k] * &objective[k]).sum();
            if best.as_ref().is_none_or(|b| value > *b) {
                best = Some(value);
            }
        }
    });
    best.is_some_and(|v| v.is_positive())
}

#[derive(Debug, Default)]
pub struct CertifiedIa {
    pub steps: Vec<ProductRestriction>,
    /// `(Q, i, s)` instances checked from both sides.
    pub instances: usize,
    pub discrepancies: usize,
    pub vertex_checks: usize,
}

/// Iterated admissibility where every step is certified from both sides:
/// each removal by a re-verified dominance certificate, each survivor by a
/// re-verified full-support justifier. Small instances are also decided by
/// vertex enumeration.
pub fn certify_ia(form: &StrategicForm<'_>) -> CertifiedIa {
    let mut out = CertifiedIa { steps: vec![form.full_restriction()], ..CertifiedIa::default() };
    loop {
        let q = out.steps.last().unwrap().clone();
        let mut next = q.sets.clone();
        for i in 0..form.num_players() {
            let against = form.coprofiles_in(i, &q);
            for &s in &q.sets[i] {
                out.instances += 1;
                let dominated = weakly_dominated(form, &q, i, s);
                let justifier = justifying_full_support_measure(form, &q, i, s);
                let ok = match (&dominated, &justifier) {
                    (Some(sigma), None) => {
                        next[i].retain(|&t| t != s);
                        check_dominance(form, &q.sets[i], &against, s, sigma)
                    }
                    (None, Some(nu)) => check_justifier(form, i, &against, s, nu),
                    _ => false,
                };
                let mut agrees = true;
                if vertex_oracle_fits(q.sets[i].len(), against.len()) {
                    out.vertex_checks += 1;
                    let rows: Vec<Vec<Rational>> =
                        q.sets[i].iter().map(|&t| against.iter().map(|&x| form.payoff(i, t, x).clone()).collect()).collect();
                    let target: Vec<Rational> = against.iter().map(|&x| form.payoff(i, s, x).clone()).collect();
                    agrees = dominated_by_vertices(&rows, &target) == dominated.is_some();
                }
                out.discrepancies += usize::from(!ok || !agrees);
            }
        }
        let next = ProductRestriction::new(next);
        let done = next == q;
        out.steps.push(next);
        if done {
            return out;
        }
    }
}

pub fn certified_ia(form: &StrategicForm<'_>) -> Vec<ProductRestriction> {
    let c = certify_ia(form);
    assert_eq!(c.discrepancies, 0, "dominance, justifier and vertex oracle disagree");
    c.steps
}

pub fn degree(h: &Hyperreal) -> Option<usize> {
    match h.leading_degree() {
        LeadingDegree::Degree(k) => Some(k),
        LeadingDegree::Zero => None,
    }
}

/// `outside / inside ≈ 0` via leading degrees.
pub fn negligible(outside: &Hyperreal, inside: &Hyperreal) -> bool {
    match (degree(outside), degree(inside)) {
        (None, Some(_)) => true,
        (Some(a), Some(b)) => a > b,
        _ => false,
    }
}

/// Cautious belief at one event from raw masses.
pub fn naive_cautious(members: &[usize], masses: &[Hyperreal], e: &[usize]) -> bool {
    let outside = members.iter().zip(masses).filter(|(x, _)| !e.contains(x)).fold(Hyperreal::zero(), |a, (_, m)| a + m.clone());
    members.iter().zip(masses).filter(|(x, _)| e.contains(x)).all(|(_, m)| negligible(&outside, m))
}

pub fn naive_c_strong(family: &ConditioningFamily, masses: &dyn Fn(usize) -> Vec<Hyperreal>, e: &[usize]) -> bool {
    (0..family.events.len()).all(|c| {
        let members = &family.events[c].members;
        !members.iter().any(|x| e.contains(x)) || naive_cautious(members, &masses(c), e)
    })
}

pub fn prior_masses<'a>(belief: &'a PriorCNPS, family: &'a ConditioningFamily) -> impl Fn(usize) -> Vec<Hyperreal> + 'a {
    move |c| family.events[c].members.iter().map(|&x| belief.prior[x].clone()).collect()
}

pub fn cps_masses<'a>(belief: &'a ExplicitCPS) -> impl Fn(usize) -> Vec<Hyperreal> + 'a {
    move |c| belief.table[c].iter().map(|p| Hyperreal::from_rational(p.clone())).collect()
}

pub fn valid_prior(belief: &PriorCNPS, n: usize) -> bool {
    belief.prior.len() == n && belief.prior.iter().all(Hyperreal::is_positive) && belief.prior.iter().sum::<Hyperreal>() == Hyperreal::one()
}

/// Rows are distributions and `μ(x|B) = μ(x|A) μ(A|B)` for nested events.
pub fn valid_cps(belief: &ExplicitCPS, family: &ConditioningFamily) -> bool {
    let rows_ok = belief.table.iter().zip(&family.events).all(|(row, ev)| {
        row.len() == ev.members.len() && row.iter().all(|p| !p.is_negative()) && row.iter().cloned().sum::<Rational>() == Rational::one()
    });
    if !rows_ok {
        return false;
    }
    let prob = |c: usize, x: usize| -> Rational {
        family.events[c].members.iter().position(|&y| y == x).map(|k| belief.table[c][k].clone()).unwrap_or_else(Rational::zero)
    };
    for a in 0..family.events.len() {
        for b in 0..family.events.len() {
            let (ea, eb) = (&family.events[a].members, &family.events[b].members);
            if a == b || !ea.iter().all(|x| eb.contains(x)) {
                continue;
            }
            let mass_a: Rational = ea.iter().map(|&x| prob(b, x)).sum();
            if ea.iter().any(|&x| prob(b, x) != prob(a, x) * &mass_a) {
                return false;
            }
        }
    }
    true
}

/// Expected payoff of `t` against raw masses over an event.
pub fn naive_value(form: &StrategicForm<'_>, player: usize, t: usize, members: &[usize], masses: &[Hyperreal]) -> Hyperreal {
    members.iter().zip(masses).fold(Hyperreal::zero(), |acc, (&x, m)| acc + m.scale(form.payoff(player, t, x)))
}

pub fn naive_best_reply(
    form: &StrategicForm<'_>,
    family: &ConditioningFamily,
    masses: &dyn Fn(usize) -> Vec<Hyperreal>,
    player: usize,
    s: usize,
    optimality: Optimality,
) -> bool {
    let game = form.game();
    (0..game.histories().len()).all(|k| {
        let target = match optimality {
            Optimality::Sequential => form.replacement(player, s, k),
            Optimality::WeakSequential if form.allows(player, s, k) => s,
            Optimality::WeakSequential => return true,
        };
        let c = family.event_of(k).expect("history");
        let members = &family.events[c].members;
        let m = masses(c);
        let own = naive_value(form, player, target, members, &m);
        form.own_allowing(player, k).into_iter().all(|t| naive_value(form, player, t, members, &m) <= own)
    })
}

/// Full-support prior with masses `c·ε^k`, normalized exactly.
pub fn random_prior(rng: &mut impl Rng, owner: usize, n: usize, bound: usize) -> PriorCNPS {
    let mut prior: Vec<Hyperreal> = (0..n)
        .map(|_| {
            let k = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..=bound) };
            Hyperreal::epsilon_pow(k, bound).unwrap().scale(&r(rng.gen_range(1..=4)))
        })
        .collect();
    let anchor = rng.gen_range(0..n);
    prior[anchor] = Hyperreal::from_rational(r(rng.gen_range(1..=4)));
    let standard: Rational = prior.iter().map(Hyperreal::standard_part).sum();
    let mut normalized: Vec<Hyperreal> = prior.iter().map(|p| p.scale(&(Rational::one() / &standard))).collect();
    let total: Hyperreal = normalized.iter().sum();
    let excess = total - Hyperreal::one();
    normalized[anchor] = &normalized[anchor] - &excess;
    PriorCNPS { owner, prior: normalized }
}

/// The CPS of standard parts of the conditionals of a prior.
pub fn standard_cps(prior: &PriorCNPS, family: &ConditioningFamily) -> ExplicitCPS {
    let table = family
        .events
        .iter()
        .map(|ev| {
            let lead = ev.members.iter().filter_map(|&x| degree(&prior.prior[x])).min().expect("positive masses");
            let coeffs: Vec<Rational> = ev
                .members
                .iter()
                .map(|&x| {
                    if degree(&prior.prior[x]) == Some(lead) {
                        prior.prior[x].coefficients()[lead].clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            let total: Rational = coeffs.iter().cloned().sum();
            coeffs.into_iter().map(|c| c / &total).collect()
        })
        .collect();
    ExplicitCPS { owner: prior.owner, table }
}

pub fn random_event(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    loop {
        let e: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !e.is_empty() {
            return e;
        }
    }
}

fn replacement_at(form: &StrategicForm<'_>, player: usize, s: usize, k: usize, optimality: Optimality) -> Option<usize> {
    match optimality {
        Optimality::Sequential => Some(form.replacement(player, s, k)),
        Optimality::WeakSequential if form.allows(player, s, k) => Some(s),
        Optimality::WeakSequential => None,
    }
}

/// Substitution check of a refutation against certified IA steps.
pub fn check_refutation(form: &StrategicForm<'_>, steps: &[ProductRestriction], failure: &Failure, optimality: Optimality) -> bool {
    let Some(r) = &failure.refutation else { return false };
    if r.against_step >= failure.step || replacement_at(form, failure.player, failure.strategy, r.history, optimality) != Some(r.replacement) {
        return false;
    }
    let survivors = form.coprofiles_in(failure.player, &steps[r.against_step]);
    let against: Vec<usize> = form.coprofiles_allowing(failure.player, r.history).into_iter().filter(|x| survivors.contains(x)).collect();
    !against.is_empty() && check_dominance(form, &form.own_allowing(failure.player, r.history), &against, r.replacement, &r.certificate)
}

/// Replays an obstruction from scratch. Each layer must be a maximal-support
/// solution of the active requirements on its phase, as witnessed by its
/// dual, and the last one must leave nothing new covered or satisfied.
pub fn check_obstruction(
    form: &StrategicForm<'_>,
    family: &ConditioningFamily,
    steps: &[ProductRestriction],
    failure: &Failure,
    optimality: Optimality,
) -> bool {
    let Some(o) = &failure.obstruction else { return false };
    let (i, n) = (failure.player, form.num_coprofiles(failure.player));
    let last: Vec<usize> = form.coprofiles_in(i, &steps[failure.step - 1]);
    let live = |e: &[usize]| e.iter().any(|x| last.contains(x));
    let mut reqs = Vec::new();
    for k in 0..form.game().histories().len() {
        let Some(target) = replacement_at(form, i, failure.strategy, k, optimality) else { continue };
        let event = form.coprofiles_allowing(i, k);
        if o.kind == LayerKind::Conditional && live(&event) {
            continue;
        }
        for t in form.own_allowing(i, k) {
            if t != target {
                let row: Vec<Rational> = (0..n)
                    .map(|x| if event.contains(&x) { form.payoff(i, target, x) - form.payoff(i, t, x) } else { r(0) })
                    .collect();
                reqs.push((Requirement { history: k, target, alternative: t }, event.clone(), row));
            }
        }
    }
    if o.requirements != reqs.iter().map(|q| q.0).collect::<Vec<_>>() || o.layers.is_empty() {
        return false;
    }
    // (allowed, sets to cover) per phase
    let phases: Vec<(Vec<usize>, Vec<Vec<usize>>)> = match o.kind {
        LayerKind::Lexicographic => (0..failure.step)
            .rev()
            .map(|m| {
                let l = form.coprofiles_in(i, &steps[m]);
                (l.clone(), l.iter().map(|&x| vec![x]).collect())
            })
            .collect(),
        LayerKind::Support => vec![(last.clone(), last.iter().map(|&x| vec![x]).collect())],
        LayerKind::Conditional => {
            let dead: Vec<Vec<usize>> = family.events.iter().map(|e| e.members.clone()).filter(|m| !m.is_empty() && !live(m)).collect();
            let laminar = dead.iter().all(|a| dead.iter().all(|b| {
                let common = a.iter().filter(|x| b.contains(x)).count();
                common == 0 || common == a.len() || common == b.len()
            }));
            if !laminar || dead.is_empty() {
                return false;
            }
            let mut allowed: Vec<usize> = dead.iter().flatten().copied().collect();
            allowed.sort_unstable();
            allowed.dedup();
            vec![(allowed, dead)]
        }
    };
    let mut covered = vec![false; n];
    let mut active = vec![true; reqs.len()];
    let dot = |a: &[Rational], b: &[Rational]| -> Rational { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    for (k, layer) in o.layers.iter().enumerate() {
        let Some((allowed, _)) = phases.iter().find(|(_, cover)| !cover.iter().all(|set| set.iter().any(|&x| covered[x]))) else {
            return false;
        };
        let mu = &layer.measure;
        if mu.len() != n || layer.dual.len() != reqs.len() || mu.iter().enumerate().any(|(x, m)| m.is_negative() || (m.is_positive() && !allowed.contains(&x))) {
            return false;
        }
        let mut v = vec![r(0); n];
        for (p, (_, _, row)) in reqs.iter().enumerate() {
            let lambda = &layer.dual[p];
            let value = dot(row, mu);
            if lambda.is_negative() || (!active[p] && !lambda.is_zero()) || (active[p] && (value.is_negative() || value.is_positive() == lambda.is_positive())) {
                return false;
            }
            for x in 0..n {
                v[x] += lambda * &row[x];
            }
        }
        if allowed.iter().any(|&x| v[x].is_positive() || mu[x].is_positive() == v[x].is_negative()) {
            return false;
        }
        let mut progress = false;
        for x in 0..n {
            if mu[x].is_positive() && !covered[x] {
                covered[x] = true;
                progress = true;
            }
        }
        for (p, (_, event, row)) in reqs.iter().enumerate() {
            let retire = match o.kind {
                LayerKind::Conditional => event.iter().any(|&x| mu[x].is_positive()),
                _ => dot(row, mu).is_positive(),
            };
            if active[p] && retire {
                active[p] = false;
                progress = true;
            }
        }
        let pending = phases.iter().any(|(_, cover)| !cover.iter().all(|set| set.iter().any(|&x| covered[x])));
        let stuck = !progress || (o.kind == LayerKind::Support && pending);
        if stuck != (k + 1 == o.layers.len()) {
            return false;
        }
    }
    true
}

/// Whether a failure carries a certificate that this module re-verifies.
pub fn check_failure(form: &StrategicForm<'_>, family: &ConditioningFamily, steps: &[ProductRestriction], failure: &Failure, optimality: Optimality) -> bool {
    check_refutation(form, steps, failure, optimality) || check_obstruction(form, family, steps, failure, optimality)
}
