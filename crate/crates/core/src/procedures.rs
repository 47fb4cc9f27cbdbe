//! The solution procedures and their per-instance audits.
//!
//! Step sets of both prudent-rationalizability procedures are taken from
//! iterated admissibility. Every surviving strategy then receives an
//! explicitly constructed belief that is checked against the procedure's
//! own definition, and every eliminated strategy carries a dominance
//! certificate. A witness that fails its audit is reported, together with a
//! refutation when one can be found: a history `h` at which `s^h` is weakly
//! dominated inside `S_i(h)` against profiles every admissible belief must
//! favor. Without one, a certified layered search (see [`crate::layers`])
//! may still show that no belief exists.

use std::collections::HashMap;

use num_traits::Zero;
use thiserror::Error;

use crate::beliefs::{c_strongly_believes, BeliefError, ConditioningFamily, ExplicitCPS, PriorCNPS, ProfileSet};
use crate::best_reply::{is_best_reply, Optimality};
use crate::dominance::{constrained_justifier_on, dominating_mixture, iterated_admissibility, justifier_on, LocalOptimality, verify_dominance, IaTrace, MixedStrategy};
use crate::game_core::{Game, PlayerId, ProductRestriction, StrategicForm, StrategySpace};
use crate::layers::{cps_from_layers, LayerKind, LayerProblem, Obstruction};
use crate::hyperreal::{Hyperreal, HyperrealError, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcedureId {
    Ia,
    PrCnps,
    PrCps,
}

impl ProcedureId {
    pub fn name(self) -> &'static str {
        match self {
            ProcedureId::Ia => "ia",
            ProcedureId::PrCnps => "pr-cnps",
            ProcedureId::PrCps => "pr-cps",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessBelief {
    Cnps(PriorCNPS),
    Cps(ExplicitCPS),
}

/// Outcome of the independent checks on one witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Audit {
    /// Full support and normalization (CNPS) or measures plus chain rule (CPS).
    pub valid: bool,
    /// c-strong belief in every earlier step set (CNPS) or the support
    /// condition at every history (CPS).
    pub restrictions: bool,
    pub best_reply: bool,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.valid && self.restrictions && self.best_reply
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub step: usize,
    pub player: PlayerId,
    pub strategy: usize,
    pub belief: WitnessBelief,
    pub audit: Audit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub step: usize,
    pub player: PlayerId,
    pub strategy: usize,
    pub certificate: MixedStrategy,
    pub verified: bool,
}

/// Proof that a strategy cannot survive a step: at history `history`,
/// `replacement` is weakly dominated by `certificate` (a mixture on
/// `S_i(h)`) against `S^m_-i ∩ S_-i(h)` with `m = against_step`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refutation {
    pub history: usize,
    pub against_step: usize,
    pub replacement: usize,
    pub certificate: MixedStrategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub procedure: ProcedureId,
    pub step: usize,
    pub player: PlayerId,
    pub strategy: usize,
    pub audit: Audit,
    pub refutation: Option<Refutation>,
    /// Certified layered search showing no belief exists, when no single
    /// history refutes the strategy.
    pub obstruction: Option<Obstruction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureTrace {
    pub procedure: ProcedureId,
    pub space: StrategySpace,
    pub optimality: Optimality,
    pub steps: Vec<ProductRestriction>,
    pub fixpoint: usize,
    pub degree_bound: usize,
    pub witnesses: Vec<Witness>,
    pub exclusions: Vec<Exclusion>,
    pub failures: Vec<Failure>,
}

impl ProcedureTrace {
    pub fn is_verified(&self) -> bool {
        self.failures.is_empty() && self.exclusions.iter().all(|e| e.verified)
    }

    pub fn witness(&self, step: usize, player: PlayerId, strategy: usize) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.step == step && w.player == player && w.strategy == strategy)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProcedureError {
    #[error("witness for strategy {} of player {} failed verification at step {}", .0.strategy, .0.player, .0.step)]
    WitnessVerificationFailed(Box<Failure>),
    #[error(transparent)]
    Hyperreal(#[from] HyperrealError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// Options shared by the procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    pub space: StrategySpace,
    pub optimality: Optimality,
    /// Audit every step instead of stopping at the first failing one.
    pub exhaustive: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { space: StrategySpace::Full, optimality: Optimality::Sequential, exhaustive: false }
    }
}

/// Everything the procedures share for one game: the tabulated form, the
/// conditioning families, the IA trace and a cache of justifying measures.
pub struct Analysis<'g> {
    pub form: StrategicForm<'g>,
    pub families: Vec<ConditioningFamily>,
    pub ia: IaTrace,
    justifiers: HashMap<(usize, PlayerId, usize), Option<Vec<Rational>>>,
    local_justifiers: HashMap<(usize, PlayerId, usize, Optimality), Option<Vec<Rational>>>,
}

impl<'g> Analysis<'g> {
    pub fn new(game: &'g Game, space: StrategySpace) -> Self {
        let form = StrategicForm::new(game, space);
        let families = (0..form.num_players()).map(|i| ConditioningFamily::new(&form, i)).collect();
        let ia = iterated_admissibility(&form);
        Analysis { form, families, ia, justifiers: HashMap::new(), local_justifiers: HashMap::new() }
    }

    /// Degree bound `D = N + 1`.
    pub fn degree_bound(&self) -> usize {
        self.ia.fixpoint + 1
    }

    pub fn coprofile_set(&self, player: PlayerId, q: &ProductRestriction) -> ProfileSet {
        ProfileSet::from_indices(self.form.num_coprofiles(player), &self.form.coprofiles_in(player, q))
    }

    /// Justifier for `s` with support exactly `Ŝ^k_-i`.
    pub fn justifier(&mut self, k: usize, player: PlayerId, strategy: usize) -> Option<Vec<Rational>> {
        if let Some(hit) = self.justifiers.get(&(k, player, strategy)) {
            return hit.clone();
        }
        let support = self.form.coprofiles_in(player, self.ia.step(k));
        let nu = justifier_on(&self.form, player, &support, strategy);
        self.justifiers.insert((k, player, strategy), nu.clone());
        nu
    }

    /// Justifier on `Ŝ^k_-i` that also makes `s` (or `s^h`) optimal at
    /// every history, falling back to [`Analysis::justifier`].
    pub fn local_justifier(&mut self, k: usize, player: PlayerId, strategy: usize, optimality: Optimality) -> Option<Vec<Rational>> {
        let key = (k, player, strategy, optimality);
        if let Some(hit) = self.local_justifiers.get(&key) {
            return hit.clone();
        }
        let form = &self.form;
        let support = form.coprofiles_in(player, self.ia.step(k));
        let local: Vec<LocalOptimality> = (0..form.game().histories().len())
            .filter_map(|h| {
                let target = match optimality {
                    Optimality::Sequential => form.replacement(player, strategy, h),
                    Optimality::WeakSequential if form.allows(player, strategy, h) => strategy,
                    Optimality::WeakSequential => return None,
                };
                Some(LocalOptimality { target, candidates: form.own_allowing(player, h), event: form.coprofiles_allowing(player, h) })
            })
            .collect();
        let nu = match constrained_justifier_on(form, player, &support, strategy, &local) {
            Some(nu) => Some(nu),
            None => self.justifier(k, player, strategy),
        };
        self.local_justifiers.insert(key, nu.clone());
        nu
    }

    fn exclusions(&self) -> Vec<Exclusion> {
        self.ia
            .eliminations
            .iter()
            .map(|e| {
                let prev = self.ia.step(e.step - 1);
                let against = self.form.coprofiles_in(e.player, prev);
                let verified = verify_dominance(&self.form, &prev.sets[e.player], &against, e.strategy, &e.certificate);
                Exclusion { step: e.step, player: e.player, strategy: e.strategy, certificate: e.certificate.clone(), verified }
            })
            .collect()
    }

    fn trace(&self, procedure: ProcedureId, settings: Settings) -> ProcedureTrace {
        ProcedureTrace {
            procedure,
            space: self.form.space(),
            optimality: settings.optimality,
            steps: self.ia.steps.clone(),
            fixpoint: self.ia.fixpoint,
            degree_bound: self.degree_bound(),
            witnesses: Vec::new(),
            exclusions: self.exclusions(),
            failures: Vec::new(),
        }
    }

    /// Iterated admissibility as a trace with dominance certificates.
    pub fn ia_trace(&self) -> ProcedureTrace {
        self.trace(ProcedureId::Ia, Settings { space: self.form.space(), ..Settings::default() })
    }

    /// Non-standard prior `(1 - Σ_{ℓ≥1} ε^ℓ)ν_0 + Σ_{ℓ≥1} ε^ℓ ν_ℓ` with
    /// `ν_ℓ` justifying `s` on `Ŝ^{n-1-ℓ}_-i`.
    pub fn cnps_witness(&mut self, step: usize, player: PlayerId, strategy: usize, optimality: Optimality) -> Result<Option<PriorCNPS>, HyperrealError> {
        let mut layers = Vec::with_capacity(step);
        for l in 0..step {
            match self.local_justifier(step - 1 - l, player, strategy, optimality) {
                Some(nu) => layers.push(nu),
                None => return Ok(None),
            }
        }
        prior_from_layers(player, &layers, self.degree_bound()).map(Some)
    }

    pub fn audit_cnps(&self, step: usize, player: PlayerId, strategy: usize, belief: &PriorCNPS, optimality: Optimality) -> Audit {
        let family = &self.families[player];
        let valid = belief.validate(self.form.num_coprofiles(player)).is_ok();
        let restrictions = valid
            && (0..step).all(|m| c_strongly_believes(belief, family, &self.coprofile_set(player, self.ia.step(m))));
        let best_reply = valid && is_best_reply(&self.form, belief, family, strategy, optimality);
        Audit { valid, restrictions, best_reply }
    }

    /// Conditioning a justifier on `Ŝ^{n-1}_-i` where it has mass, and the
    /// previous step's table elsewhere.
    pub fn cps_witness(
        &mut self,
        step: usize,
        player: PlayerId,
        strategy: usize,
        optimality: Optimality,
        previous: Option<&ExplicitCPS>,
    ) -> Option<ExplicitCPS> {
        let nu = self.local_justifier(step - 1, player, strategy, optimality)?;
        let family = &self.families[player];
        let mut table = Vec::with_capacity(family.events.len());
        for (e, event) in family.events.iter().enumerate() {
            let total: Rational = event.members.iter().map(|&x| &nu[x]).sum();
            if total.is_zero() {
                table.push(previous?.table[e].clone());
            } else {
                table.push(event.members.iter().map(|&x| &nu[x] / &total).collect());
            }
        }
        Some(ExplicitCPS { owner: player, table })
    }

    pub fn audit_cps(&self, step: usize, player: PlayerId, strategy: usize, belief: &ExplicitCPS, optimality: Optimality) -> Audit {
        let family = &self.families[player];
        let valid = belief.validate_measures(family).is_ok() && belief.validate_chain_rule(family).is_ok_and(|v| v.is_empty());
        let previous = self.coprofile_set(player, self.ia.step(step - 1));
        let restrictions = valid
            && (0..family.events.len()).all(|e| {
                let expected: Vec<usize> = family.events[e].members.iter().copied().filter(|&x| previous.contains(x)).collect();
                expected.is_empty() || belief.support(family, e) == expected
            });
        let best_reply = valid && is_best_reply(&self.form, belief, family, strategy, optimality);
        Audit { valid, restrictions, best_reply }
    }

    fn levels(&self, step: usize, player: PlayerId) -> Vec<Vec<usize>> {
        (0..step).map(|m| self.form.coprofiles_in(player, self.ia.step(m))).collect()
    }

    pub fn layer_problem(&self, step: usize, player: PlayerId, strategy: usize, optimality: Optimality, kind: LayerKind) -> LayerProblem {
        LayerProblem::new(&self.form, &self.families[player], player, strategy, optimality, &self.levels(step, player), kind)
    }

    /// Prior from a complete layered search, used when the justifier
    /// construction fails its audit.
    pub fn layered_cnps(&self, step: usize, player: PlayerId, strategy: usize, optimality: Optimality) -> Option<PriorCNPS> {
        let layers = self.layer_problem(step, player, strategy, optimality, LayerKind::Lexicographic).search()?;
        prior_from_layers(player, &layers, self.degree_bound()).ok()
    }

    pub fn layered_cps(&self, step: usize, player: PlayerId, strategy: usize, optimality: Optimality) -> Option<ExplicitCPS> {
        let live = self.layer_problem(step, player, strategy, optimality, LayerKind::Support).search()?;
        let dead = self.layer_problem(step, player, strategy, optimality, LayerKind::Conditional).search()?;
        cps_from_layers(player, &self.families[player], &live[0], &dead)
    }

    fn obstruct(&self, procedure: ProcedureId, step: usize, player: PlayerId, strategy: usize, optimality: Optimality) -> Option<Obstruction> {
        let kinds: &[LayerKind] = match procedure {
            ProcedureId::PrCps => &[LayerKind::Support, LayerKind::Conditional],
            _ => &[LayerKind::Lexicographic],
        };
        kinds.iter().find_map(|&kind| self.layer_problem(step, player, strategy, optimality, kind).obstruction())
    }

    /// Whether an obstruction replays against requirements recomputed from the game.
    pub fn verify_obstruction(&self, step: usize, player: PlayerId, strategy: usize, optimality: Optimality, obstruction: &Obstruction) -> bool {
        self.layer_problem(step, player, strategy, optimality, obstruction.kind).verify(obstruction)
    }

    /// Searches for a history where the strategy's (replacement) is weakly
    /// dominated inside `S_i(h)` against `S^m_-i ∩ S_-i(h)` for some
    /// admissible `m`.
    pub fn refute(&self, procedure: ProcedureId, step: usize, player: PlayerId, strategy: usize, optimality: Optimality) -> Option<Refutation> {
        let form = &self.form;
        let levels: Vec<usize> = match procedure {
            ProcedureId::PrCps => vec![step - 1],
            _ => (0..step).rev().collect(),
        };
        for k in 0..form.game().histories().len() {
            let target = match optimality {
                Optimality::Sequential => form.replacement(player, strategy, k),
                Optimality::WeakSequential if form.allows(player, strategy, k) => strategy,
                Optimality::WeakSequential => continue,
            };
            let candidates = form.own_allowing(player, k);
            let event = form.coprofiles_allowing(player, k);
            for &m in &levels {
                let survivors = self.coprofile_set(player, self.ia.step(m));
                let against: Vec<usize> = event.iter().copied().filter(|&x| survivors.contains(x)).collect();
                if against.is_empty() {
                    continue;
                }
                if let Some(certificate) = dominating_mixture(form, player, &candidates, &against, target) {
                    return Some(Refutation { history: k, against_step: m, replacement: target, certificate });
                }
            }
        }
        None
    }

    /// Whether a refutation's certificate re-verifies by substitution.
    pub fn verify_refutation(&self, player: PlayerId, refutation: &Refutation) -> bool {
        let k = refutation.history;
        let survivors = self.coprofile_set(player, self.ia.step(refutation.against_step));
        let against: Vec<usize> = self.form.coprofiles_allowing(player, k).into_iter().filter(|&x| survivors.contains(x)).collect();
        verify_dominance(&self.form, &self.form.own_allowing(player, k), &against, refutation.replacement, &refutation.certificate)
    }

    fn with_obstruction(&self, mut f: Failure, optimality: Optimality) -> Failure {
        if f.refutation.is_none() {
            f.obstruction = self.obstruct(f.procedure, f.step, f.player, f.strategy, optimality);
        }
        f
    }

    pub fn pr_cnps(&mut self, settings: Settings) -> Result<ProcedureTrace, HyperrealError> {
        let mut trace = self.trace(ProcedureId::PrCnps, settings);
        for step in 1..self.ia.steps.len() {
            for i in 0..self.form.num_players() {
                for s in self.ia.step(step).sets[i].clone() {
                    let opt = settings.optimality;
                    let mut found = self.cnps_witness(step, i, s, opt)?.map(|b| {
                        let audit = self.audit_cnps(step, i, s, &b, opt);
                        (b, audit)
                    });
                    let mut refutation = None;
                    if !found.as_ref().is_some_and(|(_, a)| a.passed()) {
                        refutation = self.refute(ProcedureId::PrCnps, step, i, s, opt);
                        if let Some(b) = refutation.is_none().then(|| self.layered_cnps(step, i, s, opt)).flatten() {
                            let audit = self.audit_cnps(step, i, s, &b, opt);
                            if audit.passed() || found.is_none() {
                                found = Some((b, audit));
                            }
                        }
                    }
                    let audit = match found {
                        Some((belief, audit)) => {
                            trace.witnesses.push(Witness { step, player: i, strategy: s, belief: WitnessBelief::Cnps(belief), audit });
                            audit
                        }
                        None => Audit::default(),
                    };
                    if !audit.passed() {
                        let f = Failure { procedure: ProcedureId::PrCnps, step, player: i, strategy: s, audit, refutation, obstruction: None };
                        trace.failures.push(self.with_obstruction(f, opt));
                    }
                }
            }
            if !settings.exhaustive && !trace.failures.is_empty() {
                break;
            }
        }
        Ok(trace)
    }

    pub fn pr_cps(&mut self, settings: Settings) -> ProcedureTrace {
        let mut trace = self.trace(ProcedureId::PrCps, settings);
        let mut previous: HashMap<(PlayerId, usize), ExplicitCPS> = HashMap::new();
        for step in 1..self.ia.steps.len() {
            let mut current = HashMap::new();
            for i in 0..self.form.num_players() {
                for s in self.ia.step(step).sets[i].clone() {
                    let opt = settings.optimality;
                    let mut found = self.cps_witness(step, i, s, opt, previous.get(&(i, s))).map(|b| {
                        let audit = self.audit_cps(step, i, s, &b, opt);
                        (b, audit)
                    });
                    let mut refutation = None;
                    if !found.as_ref().is_some_and(|(_, a)| a.passed()) {
                        refutation = self.refute(ProcedureId::PrCps, step, i, s, opt);
                        if let Some(b) = refutation.is_none().then(|| self.layered_cps(step, i, s, opt)).flatten() {
                            let audit = self.audit_cps(step, i, s, &b, opt);
                            if audit.passed() || found.is_none() {
                                found = Some((b, audit));
                            }
                        }
                    }
                    let audit = match found {
                        Some((belief, audit)) => {
                            current.insert((i, s), belief.clone());
                            trace.witnesses.push(Witness { step, player: i, strategy: s, belief: WitnessBelief::Cps(belief), audit });
                            audit
                        }
                        None => Audit::default(),
                    };
                    if !audit.passed() {
                        let f = Failure { procedure: ProcedureId::PrCps, step, player: i, strategy: s, audit, refutation, obstruction: None };
                        trace.failures.push(self.with_obstruction(f, opt));
                    }
                }
            }
            previous = current;
            if !settings.exhaustive && !trace.failures.is_empty() {
                break;
            }
        }
        trace
    }

    /// `m(h) = max { m ≤ N : S^m_-i ∩ S_-i(h) ≠ ∅ }`.
    pub fn sophistication_index(&self, player: PlayerId, history: usize) -> usize {
        sophistication_index(&self.form, player, &self.ia.steps, self.ia.fixpoint, history)
    }

    /// For a witness: c-strong belief in `S^m_-i` for every `m ≤ m(h)`, at every history.
    pub fn best_rationalization(&self, player: PlayerId, belief: &PriorCNPS) -> bool {
        let family = &self.families[player];
        (0..family.num_histories()).all(|k| {
            (0..=self.sophistication_index(player, k))
                .all(|m| c_strongly_believes(belief, family, &self.coprofile_set(player, self.ia.step(m))))
        })
    }
}

/// `(1 - Σ_{ℓ≥1} ε^ℓ)ν_0 + Σ_{ℓ≥1} ε^ℓ ν_ℓ`.
pub fn prior_from_layers(owner: PlayerId, layers: &[Vec<Rational>], bound: usize) -> Result<PriorCNPS, HyperrealError> {
    let mut prior = Vec::with_capacity(layers[0].len());
    for x in 0..layers[0].len() {
        let base = &layers[0][x];
        let coeffs: Vec<Rational> = std::iter::once(base.clone()).chain(layers[1..].iter().map(|nu| &nu[x] - base)).collect();
        prior.push(Hyperreal::from_coefficients(coeffs, bound)?);
    }
    Ok(PriorCNPS { owner, prior })
}

pub fn sophistication_index(form: &StrategicForm<'_>, player: PlayerId, steps: &[ProductRestriction], fixpoint: usize, history: usize) -> usize {
    let event = form.coprofiles_allowing(player, history);
    (0..=fixpoint)
        .rev()
        .find(|&m| {
            let survivors = form.coprofiles_in(player, &steps[m]);
            event.iter().any(|x| survivors.binary_search(x).is_ok())
        })
        .unwrap_or(0)
}

fn into_result(trace: ProcedureTrace) -> Result<ProcedureTrace, ProcedureError> {
    match trace.failures.first() {
        Some(failure) => Err(ProcedureError::WitnessVerificationFailed(Box::new(failure.clone()))),
        None => Ok(trace),
    }
}

pub fn iterated_admissibility_trace(game: &Game, space: StrategySpace) -> ProcedureTrace {
    Analysis::new(game, space).ia_trace()
}

/// Prudent rationalizability over CNPS beliefs, fully audited.
pub fn prudent_rationalizability_cnps(game: &Game) -> Result<ProcedureTrace, ProcedureError> {
    into_result(Analysis::new(game, StrategySpace::Full).pr_cnps(Settings::default())?)
}

/// Prudent rationalizability over standard CPS beliefs, fully audited.
pub fn prudent_rationalizability_cps(game: &Game) -> Result<ProcedureTrace, ProcedureError> {
    into_result(Analysis::new(game, StrategySpace::Full).pr_cps(Settings::default()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A re-verified refutation or obstruction shows the strategy cannot
    /// survive the step.
    Refuted,
    /// The constructed witness failed and no refutation was found.
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step-set equality {theorem} fails at step {step}: strategy {strategy} of player {player}")]
pub struct TheoremViolation {
    /// 1 for the CNPS procedure, 2 for the CPS procedure.
    pub theorem: u8,
    pub step: usize,
    pub player: PlayerId,
    pub strategy: usize,
    pub kind: ViolationKind,
    pub failure: Failure,
}

impl TheoremViolation {
    fn from_failure(failure: &Failure) -> Self {
        TheoremViolation {
            theorem: if failure.procedure == ProcedureId::PrCnps { 1 } else { 2 },
            step: failure.step,
            player: failure.player,
            strategy: failure.strategy,
            kind: if failure.refutation.is_some() || failure.obstruction.is_some() { ViolationKind::Refuted } else { ViolationKind::Unverified },
            failure: failure.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub settings: Settings,
    pub ia: ProcedureTrace,
    pub cnps: ProcedureTrace,
    pub cps: ProcedureTrace,
    /// At most one per procedure: its first failing (step, player, strategy).
    pub violations: Vec<TheoremViolation>,
    /// Number of steps at which all three procedures were audited equal.
    pub verified_steps: usize,
}

impl VerifyReport {
    pub fn check(&self) -> Result<(), TheoremViolation> {
        match self.violations.iter().min_by_key(|v| (v.step, v.theorem)) {
            Some(v) => Err(v.clone()),
            None => Ok(()),
        }
    }
}

pub fn verify_theorems(game: &Game) -> Result<VerifyReport, ProcedureError> {
    verify_with(game, Settings::default())
}

/// Runs all three procedures and audits the step-set equalities.
pub fn verify_with(game: &Game, settings: Settings) -> Result<VerifyReport, ProcedureError> {
    let mut analysis = Analysis::new(game, settings.space);
    verify_analysis(&mut analysis, settings)
}

pub fn verify_analysis(analysis: &mut Analysis<'_>, settings: Settings) -> Result<VerifyReport, ProcedureError> {
    let ia = analysis.ia_trace();
    let cnps = analysis.pr_cnps(settings)?;
    let cps = analysis.pr_cps(settings);
    let mut violations = Vec::new();
    for trace in [&cnps, &cps] {
        if let Some(f) = trace.failures.iter().min_by_key(|f| (f.step, f.player, f.strategy)) {
            violations.push(TheoremViolation::from_failure(f));
        }
    }
    let exclusions_ok = ia.exclusions.iter().all(|e| e.verified);
    let last = ia.steps.len() - 1;
    let verified_steps = if exclusions_ok {
        violations.iter().map(|v| v.step).min().unwrap_or(last + 1)
    } else {
        0
    };
    Ok(VerifyReport { settings, ia, cnps, cps, violations, verified_steps })
}

#[derive(Debug, Clone)]
pub struct ReducedReport {
    pub verify: VerifyReport,
    /// Whether the reduced IA sets are the class projections of the full ones.
    pub projection_matches: bool,
}

/// Both procedures over reduced strategies with the weak sequential best
/// reply, compared against IA on reduced strategies.
pub fn reduced_variants(game: &Game) -> Result<ReducedReport, ProcedureError> {
    let settings = Settings { space: StrategySpace::Reduced, optimality: Optimality::WeakSequential, exhaustive: false };
    let mut reduced = Analysis::new(game, StrategySpace::Reduced);
    let verify = verify_analysis(&mut reduced, settings)?;
    let full = Analysis::new(game, StrategySpace::Full);
    let projection_matches = (0..full.ia.steps.len().max(reduced.ia.steps.len())).all(|n| {
        let f = full.ia.step(n);
        let r = reduced.ia.step(n);
        (0..game.num_players()).all(|i| {
            let mut projected: Vec<usize> = f.sets[i].iter().map(|&s| reduced.form.local(i, s)).collect();
            projected.sort_unstable();
            projected.dedup();
            projected == r.sets[i]
        })
    });
    Ok(ReducedReport { verify, projection_matches })
}
