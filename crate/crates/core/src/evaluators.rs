//! Urgency valuation and eviction-victim selection.
//!
//! A user's unit-time value at slot `t` is the price of its active option
//! divided by the length of that option's window, `p / max(1, e - a)`. The
//! active option is the highest-priced option that can still be met if the
//! user runs in every slot from `t` on (ties go to the earlier deadline).
//!
//! Two densities are derived from it: per resource, `u / r^m`, and weighted
//! over all resources, `u / sum_m r^m`. T-RUEM evicts the user holding the
//! smallest per-resource density; T-RWAEM the smallest weighted density.
//! Ties evict the larger total demand, then the larger user id.
//!
//! All values are exact rationals.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;

use crate::model::{Bid, Slot};

/// Exact non-negative rational value.
pub type Value = Ratio<u64>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("user {user}: no deadline option can still be met at slot {slot}")]
    NoFeasibleOption { user: usize, slot: Slot },
}

/// Value of one user at one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueAssessment {
    pub user_id: usize,
    pub active_option: usize,
    pub unit_time_value: Value,
    pub per_resource_density: Vec<Value>,
    pub weighted_density: Value,
    /// `sum_m r^m`, used for tie-breaking.
    pub total_demand: u64,
}

impl ValueAssessment {
    /// Smallest per-resource density of this user.
    pub fn min_resource_density(&self) -> Value {
        self.per_resource_density
            .iter()
            .copied()
            .min()
            .unwrap_or_else(|| Value::from_integer(0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyTag {
    Truem,
    Trwaem,
    Custom,
}

impl fmt::Display for StrategyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyTag::Truem => "T-RUEM",
            StrategyTag::Trwaem => "T-RWAEM",
            StrategyTag::Custom => "custom",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvictionChoice {
    pub victim_user_id: usize,
    pub strategy_tag: StrategyTag,
    pub minimum_value: Value,
}

/// Index of the option used for valuation at slot `t` after `slots_done`
/// slots of work, or `None` if every deadline is out of reach.
pub fn active_option(bid: &Bid, t: Slot, slots_done: u32) -> Option<usize> {
    let remaining = bid.slots_required.saturating_sub(slots_done);
    let finish = t + remaining.saturating_sub(1);
    bid.options
        .iter()
        .enumerate()
        .filter(|(_, o)| o.deadline >= finish)
        .max_by(|(ja, a), (jb, b)| {
            a.price
                .cmp(&b.price)
                .then_with(|| b.deadline.cmp(&a.deadline))
                .then_with(|| jb.cmp(ja))
        })
        .map(|(j, _)| j)
}

/// Values `bid` at slot `t`, having completed `slots_done` slots.
pub fn assess(bid: &Bid, t: Slot, slots_done: u32) -> Result<ValueAssessment, EvalError> {
    let j = active_option(bid, t, slots_done).ok_or(EvalError::NoFeasibleOption {
        user: bid.user_id,
        slot: t,
    })?;
    let opt = bid.options[j];
    let window = u64::from(opt.deadline.saturating_sub(bid.arrival)).max(1);
    let unit_time_value = Value::new(opt.price, window);
    let per_resource_density = bid
        .demand
        .amounts()
        .iter()
        .map(|&r| Value::new(opt.price, window * u64::from(r.max(1))))
        .collect();
    let total_demand = bid.demand.total();
    let weighted_density = Value::new(opt.price, window * total_demand.max(1));
    Ok(ValueAssessment {
        user_id: bid.user_id,
        active_option: j,
        unit_time_value,
        per_resource_density,
        weighted_density,
        total_demand,
    })
}

/// Orders candidates so that the eviction victim is the minimum.
fn victim_order(a: (&Value, &ValueAssessment), b: (&Value, &ValueAssessment)) -> Ordering {
    a.0.cmp(b.0)
        .then_with(|| b.1.total_demand.cmp(&a.1.total_demand))
        .then_with(|| b.1.user_id.cmp(&a.1.user_id))
}

fn select_by(
    assessments: &[ValueAssessment],
    tag: StrategyTag,
    key: impl Fn(&ValueAssessment) -> Value,
) -> Option<EvictionChoice> {
    assessments
        .iter()
        .map(|a| (key(a), a))
        .min_by(|x, y| victim_order((&x.0, x.1), (&y.0, y.1)))
        .map(|(v, a)| EvictionChoice {
            victim_user_id: a.user_id,
            strategy_tag: tag,
            minimum_value: v,
        })
}

/// T-RUEM: evict the user with the minimum per-resource density over all
/// candidates and resources. `None` only for an empty candidate set.
pub fn select_victim_truem(assessments: &[ValueAssessment]) -> Option<EvictionChoice> {
    select_by(assessments, StrategyTag::Truem, ValueAssessment::min_resource_density)
}

/// T-RWAEM: evict the user with the minimum weighted density.
pub fn select_victim_trwaem(assessments: &[ValueAssessment]) -> Option<EvictionChoice> {
    select_by(assessments, StrategyTag::Trwaem, |a| a.weighted_density)
}

/// Weighted average of the per-resource densities with the demands as
/// weights. Equal to [`ValueAssessment::weighted_density`].
pub fn weighted_average_density(assessment: &ValueAssessment, demand: &[u32]) -> Value {
    let total: u64 = demand.iter().map(|&r| u64::from(r)).sum();
    let weighted = assessment
        .per_resource_density
        .iter()
        .zip(demand)
        .fold(Value::from_integer(0), |acc, (v, &r)| acc + v * Value::from_integer(u64::from(r)));
    weighted / Value::from_integer(total.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{bid, instance_x};

    fn v(n: u64, d: u64) -> Value {
        Value::new(n, d)
    }

    #[test]
    fn instance_x_user_one_at_first_slot() {
        let inst = instance_x();
        let a = assess(&inst.bids[0], 1, 0).unwrap();
        assert_eq!(a.active_option, 0);
        assert_eq!(a.unit_time_value, v(10, 1));
        assert_eq!(a.per_resource_density, vec![v(10, 600)]);
        assert_eq!(a.weighted_density, v(10, 600));
    }

    #[test]
    fn instance_x_user_two_falls_back_at_slot_three() {
        let inst = instance_x();
        let a = assess(&inst.bids[1], 3, 0).unwrap();
        assert_eq!(a.active_option, 1);
        assert_eq!(a.unit_time_value, v(5, 4));
    }

    #[test]
    fn zero_price_gives_zero_values() {
        let b = bid(0, 1, 1, &[100, 200], &[(3, 0)]);
        let a = assess(&b, 1, 0).unwrap();
        assert_eq!(a.unit_time_value, v(0, 1));
        assert!(a.per_resource_density.iter().all(|d| *d == v(0, 1)));
        assert_eq!(a.weighted_density, v(0, 1));
    }

    #[test]
    fn degenerate_window_uses_unit_denominator() {
        let b = bid(0, 4, 1, &[100], &[(4, 9)]);
        assert_eq!(assess(&b, 4, 0).unwrap().unit_time_value, v(9, 1));
    }

    #[test]
    fn no_feasible_option() {
        let b = bid(7, 1, 3, &[100], &[(3, 9), (4, 2)]);
        assert_eq!(
            assess(&b, 3, 0),
            Err(EvalError::NoFeasibleOption { user: 7, slot: 3 })
        );
        // one slot done: finish at 4 is still fine
        assert_eq!(assess(&b, 3, 1).unwrap().active_option, 1);
    }

    #[test]
    fn active_option_prefers_price_then_earlier_deadline() {
        let b = bid(0, 1, 1, &[100], &[(2, 5), (3, 5), (4, 7)]);
        assert_eq!(active_option(&b, 1, 0), Some(2));
        let b = bid(0, 1, 1, &[100], &[(2, 5), (3, 5)]);
        assert_eq!(active_option(&b, 1, 0), Some(0));
        assert_eq!(active_option(&b, 3, 0), Some(1));
    }

    #[test]
    fn truem_instance_x_evicts_user_two() {
        let inst = instance_x();
        let cands: Vec<_> = inst.bids.iter().map(|b| assess(b, 1, 0).unwrap()).collect();
        assert_eq!(cands[1].per_resource_density, vec![v(4, 600)]);
        let c = select_victim_truem(&cands).unwrap();
        assert_eq!(c.victim_user_id, 1);
        assert_eq!(c.minimum_value, v(4, 600));
        assert_eq!(c.strategy_tag, StrategyTag::Truem);
    }

    #[test]
    fn singleton_and_empty_candidate_sets() {
        let a = assess(&bid(3, 1, 1, &[10], &[(1, 1)]), 1, 0).unwrap();
        assert_eq!(select_victim_truem(&[a.clone()]).unwrap().victim_user_id, 3);
        assert_eq!(select_victim_trwaem(&[a]).unwrap().victim_user_id, 3);
        assert!(select_victim_truem(&[]).is_none());
    }

    #[test]
    fn identical_candidates_evict_larger_id() {
        let a = assess(&bid(2, 1, 1, &[10], &[(2, 4)]), 1, 0).unwrap();
        let b = assess(&bid(5, 1, 1, &[10], &[(2, 4)]), 1, 0).unwrap();
        assert_eq!(select_victim_truem(&[a.clone(), b.clone()]).unwrap().victim_user_id, 5);
        assert_eq!(select_victim_trwaem(&[b, a]).unwrap().victim_user_id, 5);
    }

    #[test]
    fn tie_prefers_larger_total_demand() {
        // equal densities 1/100 and 2/200 on the weighted key
        let a = assess(&bid(0, 1, 1, &[50, 50], &[(2, 1)]), 1, 0).unwrap();
        let b = assess(&bid(1, 1, 1, &[100, 100], &[(2, 2)]), 1, 0).unwrap();
        assert_eq!(a.weighted_density, b.weighted_density);
        assert_eq!(select_victim_trwaem(&[b, a]).unwrap().victim_user_id, 1);
    }

    #[test]
    fn trwaem_weighs_total_demand() {
        // u = 6 with demand [300, 300] versus u = 4 with [100, 100]
        let a = assess(&bid(0, 1, 1, &[300, 300], &[(2, 6)]), 1, 0).unwrap();
        let b = assess(&bid(1, 1, 1, &[100, 100], &[(2, 4)]), 1, 0).unwrap();
        assert_eq!(a.weighted_density, v(6, 600));
        assert_eq!(b.weighted_density, v(4, 200));
        let c = select_victim_trwaem(&[a, b]).unwrap();
        assert_eq!(c.victim_user_id, 0);
        assert_eq!(c.minimum_value, v(1, 100));
    }

    #[test]
    fn all_zero_values_fall_to_tie_rule() {
        let a = assess(&bid(0, 1, 1, &[300], &[(2, 0)]), 1, 0).unwrap();
        let b = assess(&bid(1, 1, 1, &[100], &[(2, 0)]), 1, 0).unwrap();
        let c = assess(&bid(2, 1, 1, &[300], &[(2, 0)]), 1, 0).unwrap();
        let all = [a, b, c];
        assert_eq!(select_victim_truem(&all).unwrap().victim_user_id, 2);
        assert_eq!(select_victim_trwaem(&all).unwrap().victim_user_id, 2);
    }

    #[test]
    fn truem_and_trwaem_can_disagree_with_two_resources() {
        // u = 1 each; A [900, 100] has min density 1/900, B [500, 500] 1/500.
        // Weighted: A 1/1000, B 1/1000, tie → larger id.
        let a = assess(&bid(0, 1, 1, &[900, 100], &[(2, 1)]), 1, 0).unwrap();
        let b = assess(&bid(1, 1, 1, &[500, 500], &[(2, 1)]), 1, 0).unwrap();
        assert_eq!(select_victim_truem(&[a.clone(), b.clone()]).unwrap().victim_user_id, 0);
        assert_eq!(select_victim_trwaem(&[a, b]).unwrap().victim_user_id, 1);
    }
}
