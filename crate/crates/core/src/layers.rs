//! Layer-by-layer search for beliefs under which a strategy is sequentially
//! optimal, with certificates for the cases where none exists.
//!
//! Each layer is a relative-interior point of the cone of measures that keep
//! every still-active requirement `Σ_x μ(x)(u(target, x) - u(alternative, x)) ≥ 0`
//! satisfied: its support and its set of strictly satisfied requirements are
//! both maximal. A layer is certified by a dual vector `λ ≥ 0` on the active
//! requirements with `v = Σ_p λ_p row_p ≤ 0` on the allowed profiles and
//! strict complementarity (`μ(x) > 0` exactly where `v(x) = 0`, and a
//! requirement strict exactly where `λ_p = 0`). Any other measure in the
//! cone then has smaller support and fewer strict requirements, so a
//! certified run that gets stuck rules out every belief of the given kind.

use num_traits::{One, Signed, Zero};

use crate::beliefs::{ConditioningFamily, ExplicitCPS};
use crate::best_reply::Optimality;
use crate::dominance::simplex::{LpProblem, LpResult, Relation};
use crate::game_core::{PlayerId, StrategicForm};
use crate::hyperreal::Rational;

/// `target` must do at least as well as `alternative` at `history`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Requirement {
    pub history: usize,
    pub target: usize,
    pub alternative: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    /// Layers of a lexicographic prior, entering `Ŝ^{n-1}_-i` first, then
    /// `Ŝ^{n-2}_-i`, and so on. Ties left by one layer are broken by later ones.
    Lexicographic,
    /// A single measure with support exactly `Ŝ^{n-1}_-i`.
    Support,
    /// Measures for the events that miss `Ŝ^{n-1}_-i`. Each event is
    /// governed by the first layer that reaches it.
    Conditional,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Lexicographic => "lexicographic",
            LayerKind::Support => "support",
            LayerKind::Conditional => "conditional",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedLayer {
    pub measure: Vec<Rational>,
    /// One weight per requirement, zero on inactive ones.
    pub dual: Vec<Rational>,
}

/// Certified layers of a run that gets stuck; the last layer is the one
/// that makes no progress (or exhausts the layer budget).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub kind: LayerKind,
    pub requirements: Vec<Requirement>,
    pub layers: Vec<CertifiedLayer>,
}

struct Phase {
    allowed: Vec<usize>,
    cover: Vec<Vec<usize>>,
}

pub struct LayerProblem {
    kind: LayerKind,
    num_coprofiles: usize,
    requirements: Vec<Requirement>,
    rows: Vec<Vec<Rational>>,
    events: Vec<Vec<usize>>,
    phases: Vec<Phase>,
    max_layers: Option<usize>,
    /// Whether a stuck run rules out every belief of this kind. Layers
    /// represent every system of conditionals only on nested-or-disjoint
    /// events.
    complete: bool,
}

struct State {
    covered: Vec<bool>,
    active: Vec<bool>,
}

/// All optimality requirements on `strategy`, in history order.
pub fn requirements(form: &StrategicForm<'_>, player: PlayerId, strategy: usize, optimality: Optimality) -> Vec<Requirement> {
    let mut out = Vec::new();
    for history in 0..form.game().histories().len() {
        let target = match optimality {
            Optimality::Sequential => form.replacement(player, strategy, history),
            Optimality::WeakSequential if form.allows(player, strategy, history) => strategy,
            Optimality::WeakSequential => continue,
        };
        for alternative in form.own_allowing(player, history) {
            if alternative != target {
                out.push(Requirement { history, target, alternative });
            }
        }
    }
    out
}

fn nested_or_disjoint(a: &[usize], b: &[usize]) -> bool {
    let common = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
    common == 0 || common == a.len() || common == b.len()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

impl LayerProblem {
    /// `levels[m]` lists `Ŝ^m_-i` for `m < step`.
    pub fn new(
        form: &StrategicForm<'_>,
        family: &ConditioningFamily,
        player: PlayerId,
        strategy: usize,
        optimality: Optimality,
        levels: &[Vec<usize>],
        kind: LayerKind,
    ) -> Self {
        let n = form.num_coprofiles(player);
        let mut requirements = requirements(form, player, strategy, optimality);
        let last = levels.last().expect("at least one level");
        let live = |members: &[usize]| members.iter().any(|x| last.binary_search(x).is_ok());
        if kind == LayerKind::Conditional {
            requirements.retain(|r| !live(&form.coprofiles_allowing(player, r.history)));
        }
        let events: Vec<Vec<usize>> = requirements.iter().map(|r| form.coprofiles_allowing(player, r.history)).collect();
        let rows = requirements
            .iter()
            .zip(&events)
            .map(|(r, event)| {
                let mut row = vec![Rational::zero(); n];
                for &x in event {
                    row[x] = form.payoff(player, r.target, x) - form.payoff(player, r.alternative, x);
                }
                row
            })
            .collect();
        let singletons = |set: &[usize]| set.iter().map(|&x| vec![x]).collect();
        let mut complete = true;
        let (phases, max_layers) = match kind {
            LayerKind::Lexicographic => (levels.iter().rev().map(|l| Phase { allowed: l.clone(), cover: singletons(l) }).collect(), None),
            LayerKind::Support => (vec![Phase { allowed: last.clone(), cover: singletons(last) }], Some(1)),
            LayerKind::Conditional => {
                let dead: Vec<Vec<usize>> =
                    family.events.iter().map(|e| e.members.clone()).filter(|m| !m.is_empty() && !live(m)).collect();
                let mut allowed: Vec<usize> = dead.iter().flatten().copied().collect();
                allowed.sort_unstable();
                allowed.dedup();
                complete = dead.iter().all(|a| dead.iter().all(|b| nested_or_disjoint(a, b)));
                let phases = if dead.is_empty() { Vec::new() } else { vec![Phase { allowed, cover: dead }] };
                (phases, None)
            }
        };
        LayerProblem { kind, num_coprofiles: n, requirements, rows, events, phases, max_layers, complete }
    }

    fn phase(&self, state: &State) -> Option<&Phase> {
        self.phases.iter().find(|p| !p.cover.iter().all(|set| set.iter().any(|&x| state.covered[x])))
    }

    /// Applies a layer; returns whether it made progress.
    fn apply(&self, state: &mut State, measure: &[Rational]) -> bool {
        let mut progress = false;
        for (x, m) in measure.iter().enumerate() {
            if m.is_positive() && !state.covered[x] {
                state.covered[x] = true;
                progress = true;
            }
        }
        for p in 0..self.rows.len() {
            if !state.active[p] {
                continue;
            }
            let retire = match self.kind {
                LayerKind::Conditional => self.events[p].iter().any(|&x| measure[x].is_positive()),
                _ => dot(&self.rows[p], measure).is_positive(),
            };
            if retire {
                state.active[p] = false;
                progress = true;
            }
        }
        progress
    }

    fn fresh(&self) -> State {
        State { covered: vec![false; self.num_coprofiles], active: vec![true; self.rows.len()] }
    }

    /// A relative-interior point of the cone on `allowed` for the active rows.
    fn interior(&self, allowed: &[usize], active: &[usize]) -> Vec<Rational> {
        let a = allowed.len();
        let nv = 2 * a + active.len();
        let mut lp = LpProblem::new(nv);
        for k in a..nv {
            lp.objective[k] = Rational::one();
            let mut c = vec![Rational::zero(); nv];
            c[k] = Rational::one();
            lp.push(c, Relation::Le, Rational::one());
        }
        for v in 0..a {
            let mut c = vec![Rational::zero(); nv];
            c[v] = Rational::one();
            c[a + v] = -Rational::one();
            lp.push(c, Relation::Ge, Rational::zero());
        }
        for (q, &p) in active.iter().enumerate() {
            let mut c = vec![Rational::zero(); nv];
            for (v, &x) in allowed.iter().enumerate() {
                c[v] = self.rows[p][x].clone();
            }
            c[2 * a + q] = -Rational::one();
            lp.push(c, Relation::Ge, Rational::zero());
        }
        let LpResult::Optimal { point, .. } = lp.solve().expect("well-formed layer program") else {
            unreachable!("the layer program is bounded and contains 0")
        };
        let total: Rational = point[..a].iter().sum();
        let mut measure = vec![Rational::zero(); self.num_coprofiles];
        if total.is_positive() {
            for (v, &x) in allowed.iter().enumerate() {
                measure[x] = &point[v] / &total;
            }
        }
        measure
    }

    /// Farkas multipliers showing that no measure in the cone is positive at
    /// `forced` (a profile) or strict on `forced` (a requirement).
    fn farkas(&self, allowed: &[usize], active: &[usize], forced: Result<usize, usize>) -> Vec<Rational> {
        let mut lp = LpProblem::new(allowed.len());
        for &p in active {
            lp.push(allowed.iter().map(|&x| self.rows[p][x].clone()).collect(), Relation::Ge, Rational::zero());
        }
        match forced {
            Ok(x) => lp.push(allowed.iter().map(|&y| if y == x { Rational::one() } else { Rational::zero() }).collect(), Relation::Ge, Rational::one()),
            Err(p) => lp.push(allowed.iter().map(|&x| self.rows[p][x].clone()).collect(), Relation::Ge, Rational::one()),
        }
        let LpResult::Infeasible { farkas } = lp.solve().expect("well-formed layer program") else {
            unreachable!("the relative interior is maximal")
        };
        let mut dual = vec![Rational::zero(); self.rows.len()];
        for (q, &p) in active.iter().enumerate() {
            dual[p] = -&farkas[q];
        }
        if let Err(p) = forced {
            dual[p] -= &farkas[active.len()];
        }
        dual
    }

    fn certify(&self, allowed: &[usize], active: &[usize], measure: &[Rational]) -> Vec<Rational> {
        let mut dual = vec![Rational::zero(); self.rows.len()];
        let mut add = |d: Vec<Rational>| {
            for (a, b) in dual.iter_mut().zip(d) {
                *a += b;
            }
        };
        for &x in allowed {
            if measure[x].is_zero() {
                add(self.farkas(allowed, active, Ok(x)));
            }
        }
        for &p in active {
            if !dot(&self.rows[p], measure).is_positive() {
                add(self.farkas(allowed, active, Err(p)));
            }
        }
        dual
    }

    fn run(&self, certify: bool) -> Result<Vec<Vec<Rational>>, Vec<CertifiedLayer>> {
        let mut state = self.fresh();
        let mut layers: Vec<Vec<Rational>> = Vec::new();
        let mut certified = Vec::new();
        while let Some(phase) = self.phase(&state) {
            let active: Vec<usize> = (0..self.rows.len()).filter(|&p| state.active[p]).collect();
            let measure = self.interior(&phase.allowed, &active);
            if certify {
                let dual = self.certify(&phase.allowed, &active, &measure);
                certified.push(CertifiedLayer { measure: measure.clone(), dual });
            }
            let progress = self.apply(&mut state, &measure);
            layers.push(measure);
            let exhausted = self.max_layers.is_some_and(|m| layers.len() >= m);
            if !progress || (exhausted && self.phase(&state).is_some()) {
                return Err(certified);
            }
        }
        Ok(layers)
    }

    /// Layers of a belief meeting every requirement, if one exists.
    pub fn search(&self) -> Option<Vec<Vec<Rational>>> {
        self.run(false).ok()
    }

    /// A certificate that no belief of this kind exists.
    pub fn obstruction(&self) -> Option<Obstruction> {
        if !self.complete {
            return None;
        }
        self.run(true).err().map(|layers| Obstruction { kind: self.kind, requirements: self.requirements.clone(), layers })
    }

    /// Replays an obstruction against requirements recomputed from the game.
    pub fn verify(&self, obstruction: &Obstruction) -> bool {
        if !self.complete || obstruction.kind != self.kind || obstruction.requirements != self.requirements || obstruction.layers.is_empty() {
            return false;
        }
        let mut state = self.fresh();
        let last = obstruction.layers.len() - 1;
        for (k, layer) in obstruction.layers.iter().enumerate() {
            let Some(phase) = self.phase(&state) else { return false };
            if layer.measure.len() != self.num_coprofiles || layer.dual.len() != self.rows.len() {
                return false;
            }
            let inside = |x: usize| phase.allowed.binary_search(&x).is_ok();
            if layer.measure.iter().enumerate().any(|(x, m)| m.is_negative() || (m.is_positive() && !inside(x))) {
                return false;
            }
            let mut v = vec![Rational::zero(); self.num_coprofiles];
            for p in 0..self.rows.len() {
                let lambda = &layer.dual[p];
                if lambda.is_negative() || (!state.active[p] && !lambda.is_zero()) {
                    return false;
                }
                if !state.active[p] {
                    continue;
                }
                let value = dot(&self.rows[p], &layer.measure);
                if value.is_negative() || value.is_positive() == lambda.is_positive() {
                    return false;
                }
                for &x in &phase.allowed {
                    v[x] += lambda * &self.rows[p][x];
                }
            }
            if phase.allowed.iter().any(|&x| v[x].is_positive() || layer.measure[x].is_positive() == v[x].is_negative()) {
                return false;
            }
            let progress = self.apply(&mut state, &layer.measure);
            let exhausted = self.max_layers.is_some_and(|m| k + 1 >= m);
            let stuck = !progress || (exhausted && self.phase(&state).is_some());
            if stuck != (k == last) {
                return false;
            }
        }
        true
    }
}

/// The conditional probability system defined by a live measure on
/// `Ŝ^{n-1}_-i` and layers for the events that miss it.
pub fn cps_from_layers(owner: PlayerId, family: &ConditioningFamily, live: &[Rational], dead: &[Vec<Rational>]) -> Option<ExplicitCPS> {
    let mut table = Vec::with_capacity(family.events.len());
    for event in &family.events {
        let layer = std::iter::once(live).chain(dead.iter().map(Vec::as_slice)).find(|nu| event.members.iter().any(|&x| nu[x].is_positive()))?;
        let total: Rational = event.members.iter().map(|&x| &layer[x]).sum();
        table.push(event.members.iter().map(|&x| &layer[x] / &total).collect());
    }
    Some(ExplicitCPS { owner, table })
}
