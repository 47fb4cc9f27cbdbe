//! Weak dominance, iterated admissibility and full-support justifying
//! measures, all decided by exact linear programs.

pub mod simplex;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::game_core::{PlayerId, ProductRestriction, StrategicForm};
use crate::hyperreal::Rational;
use simplex::{LpProblem, LpResult, Relation};

/// A mixture over own strategies, stored sparsely with sorted support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedStrategy {
    pub owner: PlayerId,
    pub weights: Vec<(usize, Rational)>,
}

impl MixedStrategy {
    pub fn pure(owner: PlayerId, strategy: usize) -> Self {
        MixedStrategy { owner, weights: vec![(strategy, Rational::one())] }
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights.iter().map(|(s, _)| *s).collect()
    }

    /// `U_i(σ, s_-i)`.
    pub fn payoff(&self, form: &StrategicForm<'_>, coprofile: usize) -> Rational {
        self.weights.iter().map(|(s, w)| w * form.payoff(self.owner, *s, coprofile)).sum()
    }

    pub fn is_distribution(&self) -> bool {
        self.weights.iter().all(|(_, w)| w.is_positive()) && self.weights.iter().map(|(_, w)| w).sum::<Rational>() == Rational::one()
    }

    pub fn to_json(&self, form: &StrategicForm<'_>) -> Value {
        let entries: Vec<Value> =
            self.weights.iter().map(|(s, w)| json!([form.strategy_name(self.owner, *s), w.to_string()])).collect();
        Value::Array(entries)
    }
}

/// Whether `sigma` (supported in `candidates`) weakly dominates `target`
/// against the co-profiles `against`, checked by substitution.
pub fn verify_dominance(
    form: &StrategicForm<'_>,
    candidates: &[usize],
    against: &[usize],
    target: usize,
    sigma: &MixedStrategy,
) -> bool {
    if !sigma.is_distribution() || sigma.support().iter().any(|s| !candidates.contains(s)) {
        return false;
    }
    let mut strict = false;
    for &x in against {
        let lhs = sigma.payoff(form, x);
        let rhs = form.payoff(sigma.owner, target, x);
        if lhs < *rhs {
            return false;
        }
        strict |= lhs > *rhs;
    }
    strict
}

/// Searches for a mixture on `candidates` that weakly dominates `target`
/// against `against`. Maximizes total slack; dominated iff the optimum is
/// positive.
pub fn dominating_mixture(
    form: &StrategicForm<'_>,
    player: PlayerId,
    candidates: &[usize],
    against: &[usize],
    target: usize,
) -> Option<MixedStrategy> {
    if against.is_empty() {
        return None;
    }
    let row = |r: usize| against.iter().map(|&x| form.payoff(player, r, x)).collect::<Vec<_>>();
    let own = row(target);
    // Pure dominance first; it settles most cases without an LP.
    for &r in candidates {
        if r == target {
            continue;
        }
        let other = row(r);
        if other.iter().zip(&own).all(|(a, b)| a >= b) && other.iter().zip(&own).any(|(a, b)| a > b) {
            return Some(MixedStrategy::pure(player, r));
        }
    }
    // Slack is Σ_x Σ_k σ_k Δ_k(x), linear in σ alone; rows with Δ ≥ 0
    // throughout hold for every σ.
    let n = candidates.len();
    let mut lp = LpProblem::new(n);
    let diffs: Vec<Vec<Rational>> = candidates.iter().map(|&r| row(r).into_iter().zip(&own).map(|(a, b)| a - *b).collect()).collect();
    for (k, d) in diffs.iter().enumerate() {
        lp.objective[k] = d.iter().sum();
    }
    lp.push(vec![Rational::one(); n], Relation::Eq, Rational::one());
    let mut seen: Vec<Vec<Rational>> = Vec::new();
    for t in 0..against.len() {
        let coeffs: Vec<Rational> = diffs.iter().map(|d| d[t].clone()).collect();
        if coeffs.iter().all(|c| !c.is_negative()) || seen.contains(&coeffs) {
            continue;
        }
        lp.push(coeffs.clone(), Relation::Ge, Rational::zero());
        seen.push(coeffs);
    }
    match lp.solve().expect("well-formed dominance program") {
        LpResult::Optimal { point, value } if value.is_positive() => {
            let weights = candidates.iter().zip(&point).filter(|(_, w)| !w.is_zero()).map(|(&r, w)| (r, w.clone())).collect();
            let sigma = MixedStrategy { owner: player, weights };
            assert!(verify_dominance(form, candidates, against, target, &sigma), "dominance certificate failed substitution");
            Some(sigma)
        }
        LpResult::Optimal { .. } => None,
        other => panic!("dominance program is feasible and bounded, got {other:?}"),
    }
}

/// A mixture on `Q_i` weakly dominating `s` against `Q_-i`, if any.
pub fn weakly_dominated(form: &StrategicForm<'_>, q: &ProductRestriction, player: PlayerId, strategy: usize) -> Option<MixedStrategy> {
    let against = form.coprofiles_in(player, q);
    dominating_mixture(form, player, &q.sets[player], &against, strategy)
}

/// Checks a candidate justifier: a distribution positive exactly on
/// `support` under which `strategy` is optimal among all of `S_i`.
pub fn verify_justifier(form: &StrategicForm<'_>, player: PlayerId, support: &[usize], strategy: usize, nu: &[Rational]) -> bool {
    if nu.len() != form.num_coprofiles(player) || nu.iter().sum::<Rational>() != Rational::one() {
        return false;
    }
    let positive = (0..nu.len()).all(|x| nu[x].is_positive() == support.binary_search(&x).is_ok());
    if !positive || nu.iter().any(Signed::is_negative) {
        return false;
    }
    let value = |r: usize| support.iter().map(|&x| &nu[x] * form.payoff(player, r, x)).sum::<Rational>();
    let own = value(strategy);
    (0..form.size(player)).all(|r| value(r) <= own)
}

/// A standard measure with support exactly `Q_-i` making `s` optimal among
/// all of `S_i`. Solved as `max τ` subject to `ν ≥ τ` on the support, so a
/// positive optimum yields strict positivity.
pub fn justifying_full_support_measure(
    form: &StrategicForm<'_>,
    q: &ProductRestriction,
    player: PlayerId,
    strategy: usize,
) -> Option<Vec<Rational>> {
    let support = form.coprofiles_in(player, q);
    justifier_on(form, player, &support, strategy)
}

pub fn justifier_on(form: &StrategicForm<'_>, player: PlayerId, support: &[usize], strategy: usize) -> Option<Vec<Rational>> {
    constrained_justifier_on(form, player, support, strategy, &[])
}

/// Local optimality requirement for [`constrained_justifier_on`]: `target`
/// must be optimal among `candidates` against the measure restricted to
/// `event`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalOptimality {
    pub target: usize,
    pub candidates: Vec<usize>,
    pub event: Vec<usize>,
}

/// [`justifier_on`] with extra local optimality constraints, all linear in
/// the unnormalized measure.
pub fn constrained_justifier_on(
    form: &StrategicForm<'_>,
    player: PlayerId,
    support: &[usize],
    strategy: usize,
    local: &[LocalOptimality],
) -> Option<Vec<Rational>> {
    if support.is_empty() {
        return None;
    }
    let m = support.len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut push = |diff: Vec<Rational>| {
        if diff.iter().any(Signed::is_negative) && !rows.contains(&diff) {
            rows.push(diff);
        }
    };
    let own = form.payoff_row(player, strategy);
    for r in 0..form.size(player) {
        push(support.iter().map(|&x| &own[x] - form.payoff(player, r, x)).collect());
    }
    for c in local {
        let target = form.payoff_row(player, c.target);
        for &r in &c.candidates {
            push(
                support
                    .iter()
                    .map(|&x| if c.event.binary_search(&x).is_ok() { &target[x] - form.payoff(player, r, x) } else { Rational::zero() })
                    .collect(),
            );
        }
    }
    let dense = |values: Vec<Rational>| {
        let mut nu = vec![Rational::zero(); form.num_coprofiles(player)];
        for (k, &x) in support.iter().enumerate() {
            nu[x] = values[k].clone();
        }
        assert!(verify_justifier(form, player, support, strategy, &nu), "justifier failed substitution");
        nu
    };
    let row_sums: Vec<Rational> = rows.iter().map(|row| row.iter().sum()).collect();
    if row_sums.iter().all(|v| !v.is_negative()) {
        let uniform = Rational::new(1.into(), (m as i64).into());
        return Some(dense(vec![uniform; m]));
    }
    // ν = w + τ with w ≥ 0; maximize τ.
    let tau = m;
    let mut lp = LpProblem::new(m + 1);
    lp.objective[tau] = Rational::one();
    let mut total = vec![Rational::one(); m + 1];
    total[tau] = Rational::from_integer((m as i64).into());
    lp.push(total, Relation::Eq, Rational::one());
    for (row, sum) in rows.into_iter().zip(row_sums) {
        let mut coeffs = row;
        coeffs.push(sum);
        lp.push(coeffs, Relation::Ge, Rational::zero());
    }
    match lp.solve().expect("well-formed justifier program") {
        LpResult::Optimal { point, value } if value.is_positive() => Some(dense((0..m).map(|k| &point[k] + &value).collect())),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    pub step: usize,
    pub player: PlayerId,
    pub strategy: usize,
    /// Dominates the strategy with respect to the previous step's set.
    pub certificate: MixedStrategy,
}

/// `Ŝ^0 ⊇ Ŝ^1 ⊇ …`; `steps[fixpoint] == steps[fixpoint + 1]` is the last pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IaTrace {
    pub steps: Vec<ProductRestriction>,
    pub fixpoint: usize,
    pub eliminations: Vec<Elimination>,
}

impl IaTrace {
    pub fn step(&self, n: usize) -> &ProductRestriction {
        &self.steps[n.min(self.steps.len() - 1)]
    }

    pub fn limit(&self) -> &ProductRestriction {
        self.steps.last().expect("trace has step 0")
    }
}

/// Iterated admissibility: each round removes every strategy weakly
/// dominated with respect to the previous round's product set.
pub fn iterated_admissibility(form: &StrategicForm<'_>) -> IaTrace {
    let mut steps = vec![form.full_restriction()];
    let mut eliminations = Vec::new();
    loop {
        let current = steps.last().expect("nonempty").clone();
        let n = steps.len();
        let mut next = current.sets.clone();
        for i in 0..form.num_players() {
            let against = form.coprofiles_in(i, &current);
            for &s in &current.sets[i] {
                if let Some(certificate) = dominating_mixture(form, i, &current.sets[i], &against, s) {
                    next[i].retain(|&t| t != s);
                    eliminations.push(Elimination { step: n, player: i, strategy: s, certificate });
                }
            }
        }
        let next = ProductRestriction::new(next);
        let done = next == current;
        steps.push(next);
        if done {
            let fixpoint = steps.len() - 2;
            return IaTrace { steps, fixpoint, eliminations };
        }
    }
}
