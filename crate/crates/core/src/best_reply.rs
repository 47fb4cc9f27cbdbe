//! Conditional expected payoffs and the sequential (ρ) and weak sequential
//! (ρ̄) best-reply correspondences.

use thiserror::Error;

use crate::beliefs::{BeliefError, ConditionalBelief, ConditioningFamily};
use crate::game_core::{PlayerId, StrategicForm};
use crate::hyperreal::Hyperreal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BestReplyError {
    #[error("strategy {strategy} does not allow history {history}")]
    StrategyDisallowsHistory { strategy: usize, history: usize },
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// Which histories a best reply must be optimal at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Optimality {
    /// Every history, through the replacement `s_i^h` (ρ).
    Sequential,
    /// Only the histories the strategy allows (ρ̄).
    WeakSequential,
}

/// Unnormalized `E(U_i(r, ·) | h)` for every own strategy `r`, at one event.
pub fn event_values<B: ConditionalBelief>(
    form: &StrategicForm<'_>,
    belief: &B,
    family: &ConditioningFamily,
    event: usize,
) -> Vec<Hyperreal> {
    let i = belief.owner();
    let masses = belief.masses(family, event);
    let members = &family.events[event].members;
    (0..form.size(i))
        .map(|r| {
            let row = form.payoff_row(i, r);
            let mut acc = Hyperreal::zero();
            for (&x, m) in members.iter().zip(&masses) {
                acc.add_scaled(m, &row[x]);
            }
            acc
        })
        .collect()
}

pub fn expected_payoff<B: ConditionalBelief>(
    form: &StrategicForm<'_>,
    belief: &B,
    family: &ConditioningFamily,
    strategy: usize,
    history: usize,
) -> Result<Hyperreal, BestReplyError> {
    let i = belief.owner();
    let event = family.event_of(history)?;
    if !form.allows(i, strategy, history) {
        return Err(BestReplyError::StrategyDisallowsHistory { strategy, history });
    }
    Ok(event_values(form, belief, family, event).swap_remove(strategy))
}

/// Per history: the set of own strategies attaining the maximum over `S_i(h)`.
pub fn optimal_sets<B: ConditionalBelief>(form: &StrategicForm<'_>, belief: &B, family: &ConditioningFamily) -> Vec<Vec<bool>> {
    let i = belief.owner();
    let values: Vec<Vec<Hyperreal>> = (0..family.events.len()).map(|e| event_values(form, belief, family, e)).collect();
    (0..family.num_histories())
        .map(|k| {
            let vals = &values[family.event_of(k).expect("history in range")];
            let allowed = form.own_allowing(i, k);
            let best = allowed.iter().map(|&r| &vals[r]).max().expect("S_i(h) is nonempty");
            (0..form.size(i)).map(|r| form.allows(i, r, k) && &vals[r] == best).collect()
        })
        .collect()
}

fn qualifies(form: &StrategicForm<'_>, optimal: &[Vec<bool>], i: PlayerId, s: usize, mode: Optimality) -> bool {
    (0..optimal.len()).all(|k| match mode {
        Optimality::Sequential => optimal[k][form.replacement(i, s, k)],
        Optimality::WeakSequential => !form.allows(i, s, k) || optimal[k][s],
    })
}

pub fn best_replies<B: ConditionalBelief>(
    form: &StrategicForm<'_>,
    belief: &B,
    family: &ConditioningFamily,
    mode: Optimality,
) -> Vec<usize> {
    let i = belief.owner();
    let optimal = optimal_sets(form, belief, family);
    (0..form.size(i)).filter(|&s| qualifies(form, &optimal, i, s, mode)).collect()
}

/// ρ_i: `s_i^h` is conditionally optimal at every history.
pub fn sequential_best_replies<B: ConditionalBelief>(form: &StrategicForm<'_>, belief: &B, family: &ConditioningFamily) -> Vec<usize> {
    best_replies(form, belief, family, Optimality::Sequential)
}

/// ρ̄_i: optimality at the histories in `H_i(s_i)` only.
pub fn weak_sequential_best_replies<B: ConditionalBelief>(
    form: &StrategicForm<'_>,
    belief: &B,
    family: &ConditioningFamily,
) -> Vec<usize> {
    best_replies(form, belief, family, Optimality::WeakSequential)
}

pub fn is_best_reply<B: ConditionalBelief>(
    form: &StrategicForm<'_>,
    belief: &B,
    family: &ConditioningFamily,
    strategy: usize,
    mode: Optimality,
) -> bool {
    let i = belief.owner();
    let mut values: Vec<Option<Vec<Hyperreal>>> = vec![None; family.events.len()];
    (0..family.num_histories()).all(|k| {
        let target = match mode {
            Optimality::Sequential => form.replacement(i, strategy, k),
            Optimality::WeakSequential if form.allows(i, strategy, k) => strategy,
            Optimality::WeakSequential => return true,
        };
        let e = family.event_of(k).expect("history in range");
        let vals = values[e].get_or_insert_with(|| event_values(form, belief, family, e));
        form.own_allowing(i, k).iter().all(|&r| vals[r] <= vals[target])
    })
}
