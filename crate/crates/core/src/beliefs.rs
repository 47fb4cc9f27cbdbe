//! Conditional belief systems over co-player profiles and the belief
//! operators: cautious, c-strong, strong and weak belief.
//!
//! Conditional masses are never normalized. Every operator compares masses
//! inside one conditioning event, where the normalizing constant is common
//! and positive.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::game_core::{PlayerId, StrategicForm};
use crate::hyperreal::{ratio_st_is_zero, Hyperreal, HyperrealError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeliefError {
    #[error("prior must have one entry per co-player profile ({expected}), found {found}")]
    Shape { expected: usize, found: usize },
    #[error("prior mass of profile {profile} is not positive")]
    NotFullSupport { profile: usize },
    #[error("prior sums to {total}, not 1")]
    NotNormalized { total: String },
    #[error("belief table has no measure for event {event}")]
    IncompleteTable { event: usize },
    #[error("measure for event {event} is not a probability distribution on it")]
    InvalidMeasure { event: usize },
    #[error("history index {0} is out of range")]
    UnknownHistory(usize),
    #[error("event does not meet the conditioning event of history {history}")]
    VacuousEvent { history: usize },
    #[error(transparent)]
    Hyperreal(#[from] HyperrealError),
}

/// A distinct conditioning event `S_-i(h)` and the histories inducing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Sorted co-profile indices.
    pub members: Vec<usize>,
    /// History positions, preorder.
    pub histories: Vec<usize>,
}

/// The family `{ S_-i(h) : h ∈ H }`, deduplicated by set equality.
#[derive(Debug, Clone)]
pub struct ConditioningFamily {
    pub owner: PlayerId,
    pub num_coprofiles: usize,
    pub events: Vec<Event>,
    event_of: Vec<usize>,
}

impl ConditioningFamily {
    pub fn new(form: &StrategicForm<'_>, owner: PlayerId) -> Self {
        let mut events: Vec<Event> = Vec::new();
        let mut event_of = Vec::new();
        for k in 0..form.game().histories().len() {
            let members = form.coprofiles_allowing(owner, k);
            match events.iter().position(|e| e.members == members) {
                Some(e) => {
                    events[e].histories.push(k);
                    event_of.push(e);
                }
                None => {
                    event_of.push(events.len());
                    events.push(Event { members, histories: vec![k] });
                }
            }
        }
        ConditioningFamily { owner, num_coprofiles: form.num_coprofiles(owner), events, event_of }
    }

    pub fn event_of(&self, history: usize) -> Result<usize, BeliefError> {
        self.event_of.get(history).copied().ok_or(BeliefError::UnknownHistory(history))
    }

    pub fn root(&self) -> usize {
        self.event_of[0]
    }

    pub fn num_histories(&self) -> usize {
        self.event_of.len()
    }

    /// Events strictly or weakly contained in `outer`.
    pub fn subevents(&self, outer: usize) -> impl Iterator<Item = usize> + '_ {
        let big = &self.events[outer].members;
        (0..self.events.len()).filter(move |&d| is_sorted_subset(&self.events[d].members, big))
    }
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

/// A set of co-player profiles, as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProfileSet {
    mask: Vec<bool>,
}

impl ProfileSet {
    pub fn from_indices(size: usize, indices: &[usize]) -> Self {
        let mut mask = vec![false; size];
        for &x in indices {
            mask[x] = true;
        }
        ProfileSet { mask }
    }

    pub fn full(size: usize) -> Self {
        ProfileSet { mask: vec![true; size] }
    }

    pub fn empty(size: usize) -> Self {
        ProfileSet { mask: vec![false; size] }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&x| self.mask[x]).collect()
    }

    pub fn is_subset_of(&self, other: &ProfileSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

/// Anything that assigns (possibly unnormalized) masses to the members of
/// each conditioning event.
pub trait ConditionalBelief {
    fn owner(&self) -> PlayerId;

    /// Masses aligned with `family.events[event].members`.
    fn masses(&self, family: &ConditioningFamily, event: usize) -> Vec<Hyperreal>;
}

/// CNPS generated by conditioning a full-support non-standard prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorCNPS {
    pub owner: PlayerId,
    pub prior: Vec<Hyperreal>,
}

impl PriorCNPS {
    pub fn new(owner: PlayerId, prior: Vec<Hyperreal>, num_coprofiles: usize) -> Result<Self, BeliefError> {
        let belief = PriorCNPS { owner, prior };
        belief.validate(num_coprofiles)?;
        Ok(belief)
    }

    /// Full support and exact normalization.
    pub fn validate(&self, num_coprofiles: usize) -> Result<(), BeliefError> {
        if self.prior.len() != num_coprofiles {
            return Err(BeliefError::Shape { expected: num_coprofiles, found: self.prior.len() });
        }
        if let Some(profile) = self.prior.iter().position(|p| !p.is_positive()) {
            return Err(BeliefError::NotFullSupport { profile });
        }
        let total: Hyperreal = self.prior.iter().sum();
        if total != Hyperreal::one() {
            return Err(BeliefError::NotNormalized { total: total.to_string() });
        }
        Ok(())
    }

    /// Restriction of the prior to `S_-i(h)`, aligned with the event's members.
    pub fn conditional(&self, family: &ConditioningFamily, history: usize) -> Result<Vec<Hyperreal>, BeliefError> {
        Ok(self.masses(family, family.event_of(history)?))
    }

    /// Exact normalized table; only usable when every conditional mass is a
    /// standard number, i.e. the prior has no infinitesimal part.
    pub fn to_explicit(&self, family: &ConditioningFamily) -> Option<ExplicitCPS> {
        let mut table = Vec::with_capacity(family.events.len());
        for e in 0..family.events.len() {
            let masses = self.masses(family, e);
            if masses.iter().any(|m| m.degree() > 0) {
                return None;
            }
            let standard: Vec<Rational> = masses.iter().map(Hyperreal::standard_part).collect();
            let total: Rational = standard.iter().sum();
            table.push(standard.into_iter().map(|m| m / &total).collect());
        }
        Some(ExplicitCPS { owner: self.owner, table })
    }

    pub fn to_json(&self, form: &StrategicForm<'_>) -> Value {
        let entries: Vec<Value> = self
            .prior
            .iter()
            .enumerate()
            .map(|(x, p)| json!([coprofile_label(form, self.owner, x), p.to_string()]))
            .collect();
        json!({ "kind": "cnps", "prior": entries })
    }
}

impl ConditionalBelief for PriorCNPS {
    fn owner(&self) -> PlayerId {
        self.owner
    }

    fn masses(&self, family: &ConditioningFamily, event: usize) -> Vec<Hyperreal> {
        family.events[event].members.iter().map(|&x| self.prior[x].clone()).collect()
    }
}

/// Explicit standard CPS: one rational distribution per conditioning event.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitCPS {
    pub owner: PlayerId,
    /// `table[e][k]` is the probability of `family.events[e].members[k]`.
    pub table: Vec<Vec<Rational>>,
}

/// A failed chain-rule identity `μ(E|C) = μ(E|D)·μ(D|C)` for singleton `E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainViolation {
    pub profile: usize,
    pub inner: usize,
    pub outer: usize,
}

impl ExplicitCPS {
    pub fn new(owner: PlayerId, table: Vec<Vec<Rational>>, family: &ConditioningFamily) -> Result<Self, BeliefError> {
        let cps = ExplicitCPS { owner, table };
        cps.validate_measures(family)?;
        Ok(cps)
    }

    /// Each entry is a probability distribution on its event.
    pub fn validate_measures(&self, family: &ConditioningFamily) -> Result<(), BeliefError> {
        for (event, e) in family.events.iter().enumerate() {
            let row = self.table.get(event).ok_or(BeliefError::IncompleteTable { event })?;
            if row.len() != e.members.len() || row.iter().any(Signed::is_negative) || row.iter().sum::<Rational>() != Rational::one() {
                return Err(BeliefError::InvalidMeasure { event });
            }
        }
        Ok(())
    }

    pub fn probability(&self, family: &ConditioningFamily, event: usize, profile: usize) -> Rational {
        match family.events[event].members.binary_search(&profile) {
            Ok(k) => self.table[event][k].clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Checks the chain rule over every nested pair `D ⊆ C` of events and
    /// every singleton `E ⊆ D`. Singletons suffice: both sides are additive
    /// in `E`.
    pub fn validate_chain_rule(&self, family: &ConditioningFamily) -> Result<Vec<ChainViolation>, BeliefError> {
        if self.table.len() < family.events.len() {
            return Err(BeliefError::IncompleteTable { event: self.table.len() });
        }
        let mut violations = Vec::new();
        for outer in 0..family.events.len() {
            for inner in family.subevents(outer) {
                let d_given_c: Rational =
                    family.events[inner].members.iter().map(|&x| self.probability(family, outer, x)).sum();
                for (k, &x) in family.events[inner].members.iter().enumerate() {
                    if self.probability(family, outer, x) != &self.table[inner][k] * &d_given_c {
                        violations.push(ChainViolation { profile: x, inner, outer });
                    }
                }
            }
        }
        Ok(violations)
    }

    pub fn support(&self, family: &ConditioningFamily, event: usize) -> Vec<usize> {
        family.events[event].members.iter().zip(&self.table[event]).filter(|(_, p)| !p.is_zero()).map(|(&x, _)| x).collect()
    }

    pub fn to_json(&self, form: &StrategicForm<'_>, family: &ConditioningFamily) -> Value {
        let events: Vec<Value> = family
            .events
            .iter()
            .zip(&self.table)
            .map(|(e, row)| {
                let histories: Vec<String> =
                    e.histories.iter().map(|&k| form.game().history_label(form.game().histories()[k])).collect();
                let dist: Vec<Value> = e
                    .members
                    .iter()
                    .zip(row)
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(&x, p)| json!([coprofile_label(form, self.owner, x), p.to_string()]))
                    .collect();
                json!({ "histories": histories, "distribution": dist })
            })
            .collect();
        json!({ "kind": "cps", "events": events })
    }
}

impl ConditionalBelief for ExplicitCPS {
    fn owner(&self) -> PlayerId {
        self.owner
    }

    fn masses(&self, _family: &ConditioningFamily, event: usize) -> Vec<Hyperreal> {
        self.table[event].iter().map(|p| Hyperreal::from_rational(p.clone())).collect()
    }
}

/// Co-profile rendered as strategy names joined by `,`.
pub fn coprofile_label(form: &StrategicForm<'_>, owner: PlayerId, x: usize) -> String {
    let others: Vec<usize> = (0..form.num_players()).filter(|&j| j != owner).collect();
    let names: Vec<String> = form.coprofile(owner, x).iter().zip(&others).map(|(&s, &j)| form.strategy_name(j, s)).collect();
    format!("({})", names.join(","))
}

fn split_masses<B: ConditionalBelief>(
    belief: &B,
    family: &ConditioningFamily,
    event: usize,
    e: &ProfileSet,
) -> (Vec<Hyperreal>, Hyperreal) {
    let masses = belief.masses(family, event);
    let mut inside = Vec::new();
    let mut outside = Hyperreal::zero();
    for (&x, m) in family.events[event].members.iter().zip(masses) {
        if e.contains(x) {
            inside.push(m);
        } else {
            outside = outside + m;
        }
    }
    (inside, outside)
}

/// Cautious belief in `e` at event `event`: the mass off `e` is
/// infinitesimal relative to every single profile of `e` in the event. A
/// zero-mass profile inside `e` makes the ratio undefined and the belief
/// fails.
pub fn cautiously_believes_at<B: ConditionalBelief>(
    belief: &B,
    family: &ConditioningFamily,
    event: usize,
    e: &ProfileSet,
) -> Result<bool, BeliefError> {
    let (inside, outside) = split_masses(belief, family, event, e);
    if inside.is_empty() {
        return Err(BeliefError::VacuousEvent { history: family.events[event].histories[0] });
    }
    for m in &inside {
        match ratio_st_is_zero(&outside, m) {
            Ok(true) => {}
            Ok(false) | Err(HyperrealError::ZeroDenominator) => return Ok(false),
            Err(err) => return Err(err.into()),
        }
    }
    Ok(true)
}

pub fn cautiously_believes<B: ConditionalBelief>(
    belief: &B,
    family: &ConditioningFamily,
    history: usize,
    e: &ProfileSet,
) -> Result<bool, BeliefError> {
    cautiously_believes_at(belief, family, family.event_of(history)?, e)
}

fn meets(family: &ConditioningFamily, event: usize, e: &ProfileSet) -> bool {
    family.events[event].members.iter().any(|&x| e.contains(x))
}

/// c-strong belief, as cautious belief at every event that `e` meets.
pub fn c_strongly_believes<B: ConditionalBelief>(belief: &B, family: &ConditioningFamily, e: &ProfileSet) -> bool {
    let direct = c_strongly_believes_direct(belief, family, e);
    debug_assert_eq!(direct, c_strongly_believes_intersection(belief, family, e));
    direct
}

/// Def.-style form: the complement mass is summed over all of `S_-i` using
/// the conditional measure, which vanishes off the event.
pub fn c_strongly_believes_direct<B: ConditionalBelief>(belief: &B, family: &ConditioningFamily, e: &ProfileSet) -> bool {
    (0..family.events.len()).filter(|&c| meets(family, c, e)).all(|c| {
        let masses = belief.masses(family, c);
        let members = &family.events[c].members;
        let conditional = |x: usize| members.binary_search(&x).map(|k| masses[k].clone()).unwrap_or_else(|_| Hyperreal::zero());
        let complement: Hyperreal = (0..family.num_coprofiles).filter(|&x| !e.contains(x)).map(conditional).fold(Hyperreal::zero(), |a, b| a + b);
        members.iter().filter(|&&x| e.contains(x)).all(|&x| ratio_st_is_zero(&complement, &conditional(x)).unwrap_or(false))
    })
}

/// Intersection form: the complement is intersected with the event first.
pub fn c_strongly_believes_intersection<B: ConditionalBelief>(
    belief: &B,
    family: &ConditioningFamily,
    e: &ProfileSet,
) -> bool {
    (0..family.events.len())
        .filter(|&c| meets(family, c, e))
        .all(|c| cautiously_believes_at(belief, family, c, e).unwrap_or(false))
}

/// Strong belief: conditional probability exactly one wherever `e` is possible.
pub fn strongly_believes<B: ConditionalBelief>(belief: &B, family: &ConditioningFamily, e: &ProfileSet) -> bool {
    (0..family.events.len()).filter(|&c| meets(family, c, e)).all(|c| split_masses(belief, family, c, e).1.is_zero())
}

/// Weak belief: the conditional probability of `e` has standard part one.
pub fn weakly_believes<B: ConditionalBelief>(
    belief: &B,
    family: &ConditioningFamily,
    history: usize,
    e: &ProfileSet,
) -> Result<bool, BeliefError> {
    let event = family.event_of(history)?;
    let (inside, outside) = split_masses(belief, family, event, e);
    let total = inside.iter().fold(outside.clone(), |acc, m| &acc + m);
    Ok(ratio_st_is_zero(&outside, &total)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::fixtures::*;
    use crate::game_core::StrategySpace;
    use crate::hyperreal::{integer, rational};

    fn h(s: &str) -> Hyperreal {
        s.parse().unwrap()
    }

    /// Static game where the column player has `n` strategies; the row
    /// player's beliefs range over them.
    fn row_family(n: usize) -> (crate::game_core::Game, usize) {
        let cols: Vec<String> = (0..n).map(|k| format!("c{k}")).collect();
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        let cells = vec![[0, 0]; 2 * n];
        (bimatrix(&["T", "B"], &cols, &cells), n)
    }

    #[test]
    fn family_deduplicates_and_contains_root() {
        let g = two_stage();
        let form = StrategicForm::new(&g, StrategySpace::Full);
        let fam = ConditioningFamily::new(&form, 0);
        assert_eq!(fam.events[fam.root()].members.len(), form.num_coprofiles(0));
        // Stage-2 histories after (u,L) and (d,L) share S_-A(h).
        assert_eq!(fam.events.len(), 3);
        assert!(fam.events.iter().all(|e| !e.members.is_empty()));
    }

    #[test]
    fn cautious_examples() {
        let (g, n) = row_family(2);
        let form = StrategicForm::new(&g, StrategySpace::Full);
        let fam = ConditioningFamily::new(&form, 0);
        let a = ProfileSet::from_indices(n, &[0]);
        let b = PriorCNPS::new(0, vec![h("1 - e"), h("e")], n).unwrap();
        assert!(cautiously_believes(&b, &fam, 0, &a).unwrap());
        assert!(cautiously_believes(&b, &fam, 0, &ProfileSet::full(n)).unwrap());
        let flat = PriorCNPS::new(0, vec![h("1/2"), h("1/2")], n).unwrap();
        assert!(!cautiously_believes(&flat, &fam, 0, &a).unwrap());
        assert!(matches!(
            cautiously_believes(&flat, &fam, 0, &ProfileSet::empty(n)),
            Err(BeliefError::VacuousEvent { .. })
        ));
        assert!(c_strongly_believes(&flat, &fam, &ProfileSet::empty(n)));
    }

    #[test]
    fn caution_is_event_relative() {
        let (g, n) = row_family(3);
        let form = StrategicForm::new(&g, StrategySpace::Full);
        let fam = ConditioningFamily::new(&form, 0);
        let b = PriorCNPS::new(0, vec![h("1 - e - e^2"), h("e"), h("e^2")], n).unwrap();
        assert!(cautiously_believes(&b, &fam, 0, &ProfileSet::from_indices(n, &[0, 1])).unwrap());
        assert!(!cautiously_believes(&b, &fam, 0, &ProfileSet::from_indices(n, &[0, 2])).unwrap());
    }

    #[test]
    fn strong_and_weak_examples() {
        let (g, n) = row_family(2);
        let form = StrategicForm::new(&g, StrategySpace::Full);
        let fam = ConditioningFamily::new(&form, 0);
        let a = ProfileSet::from_indices(n, &[0]);
        let b = PriorCNPS::new(0, vec![h("1 - e"), h("e")], n).unwrap();
        assert!(!strongly_believes(&b, &fam, &a));
        assert!(weakly_believes(&b, &fam, 0, &a).unwrap());
        let flat = PriorCNPS::new(0, vec![h("1/2"), h("1/2")], n).unwrap();
        assert!(!weakly_believes(&flat, &fam, 0, &a).unwrap());
        let point = ExplicitCPS::new(0, vec![vec![integer(1), integer(0)]], &fam).unwrap();
        assert!(strongly_believes(&point, &fam, &a));
    }

    #[test]
    fn prior_validation() {
        assert!(matches!(PriorCNPS::new(0, vec![h("1"), h("0")], 2), Err(BeliefError::NotFullSupport { profile: 1 })));
        assert!(matches!(PriorCNPS::new(0, vec![h("1/2"), h("1/3")], 2), Err(BeliefError::NotNormalized { .. })));
        assert!(matches!(PriorCNPS::new(0, vec![h("1")], 2), Err(BeliefError::Shape { .. })));
    }

    #[test]
    fn chain_rule_detects_perturbation() {
        let g = two_stage();
        let form = StrategicForm::new(&g, StrategySpace::Full);
        let fam = ConditioningFamily::new(&form, 0);
        let m = fam.num_coprofiles;
        let prior: Vec<Hyperreal> = (0..m).map(|_| Hyperreal::from_rational(rational(1, m as i64))).collect();
        let cps = PriorCNPS::new(0, prior, m).unwrap().to_explicit(&fam).unwrap();
        assert!(cps.validate_chain_rule(&fam).unwrap().is_empty());
        let mut bad = cps.clone();
        let inner = (0..fam.events.len()).find(|&e| e != fam.root()).unwrap();
        bad.table[inner][0] += rational(1, 100);
        bad.table[inner][1] -= rational(1, 100);
        let violations = bad.validate_chain_rule(&fam).unwrap();
        assert!(violations.iter().any(|v| v.inner == inner && v.outer == fam.root()));
        bad.table.pop();
        assert!(matches!(bad.validate_chain_rule(&fam), Err(BeliefError::IncompleteTable { .. })));
    }

    #[test]
    fn explicit_cautious_belief_is_support_inclusion() {
        let (g, n) = row_family(3);
        let form = StrategicForm::new(&g, StrategySpace::Full);
        let fam = ConditioningFamily::new(&form, 0);
        let cps = ExplicitCPS::new(0, vec![vec![rational(1, 2), rational(1, 2), integer(0)]], &fam).unwrap();
        assert!(cautiously_believes(&cps, &fam, 0, &ProfileSet::from_indices(n, &[0, 1])).unwrap());
        assert!(!cautiously_believes(&cps, &fam, 0, &ProfileSet::from_indices(n, &[0])).unwrap());
        // Zero-mass member of E: the ratio is undefined.
        assert!(!cautiously_believes(&cps, &fam, 0, &ProfileSet::from_indices(n, &[0, 1, 2])).unwrap());
    }
}
