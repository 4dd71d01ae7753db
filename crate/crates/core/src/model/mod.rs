//! Bids, instances and schedules.
//!
//! Resource amounts are integer milli-units: a capacity of [`FULL_CAPACITY`]
//! is one normalized unit of a resource. Slots are 1-based and inclusive, so a
//! job arriving at `a` may run in slot `a`, and a job whose last slot is `f`
//! meets a deadline `e` iff `f <= e`.

mod format;
mod validate;

use std::fmt;

pub use format::{emit_instance, emit_schedule, parse_instance, parse_schedule, ParseError, SCHEDULE_HEADER};
pub use validate::{price_warnings, validate_instance, validate_schedule, Violation, Warning};

/// 1-based slot index.
pub type Slot = u32;

/// Integer price units.
pub type Price = u64;

/// Milli-units representing one normalized unit of a resource.
pub const FULL_CAPACITY: u32 = 1000;

/// Per-resource demand of one job, in milli-units.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResourceDemand(Vec<u32>);

impl ResourceDemand {
    pub fn new(amounts: Vec<u32>) -> Self {
        Self(amounts)
    }

    pub fn amounts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum over resource types.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&a| u64::from(a)).sum()
    }

    /// Largest single-resource amount.
    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl From<Vec<u32>> for ResourceDemand {
    fn from(amounts: Vec<u32>) -> Self {
        Self(amounts)
    }
}

/// One alternative hard deadline and the price offered for meeting it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DeadlineOption {
    pub deadline: Slot,
    pub price: Price,
}

impl DeadlineOption {
    pub fn new(deadline: Slot, price: Price) -> Self {
        Self { deadline, price }
    }
}

/// A user's bid: arrival slot, demand, the number of slots the job needs
/// (not necessarily contiguous) and an XOR menu of deadline options.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bid {
    pub user_id: usize,
    pub arrival: Slot,
    pub slots_required: u32,
    pub demand: ResourceDemand,
    pub options: Vec<DeadlineOption>,
}

impl Bid {
    /// Earliest slot at which the job can finish.
    pub fn earliest_completion(&self) -> Slot {
        self.arrival + self.slots_required.saturating_sub(1)
    }

    /// Latest deadline across the menu, or 0 for an empty menu.
    pub fn latest_deadline(&self) -> Slot {
        self.options.iter().map(|o| o.deadline).max().unwrap_or(0)
    }

    /// Highest price across the menu.
    pub fn best_price(&self) -> Price {
        self.options.iter().map(|o| o.price).max().unwrap_or(0)
    }

    /// Index of the tightest option whose deadline is `>= completion`.
    pub fn tightest_met(&self, completion: Slot) -> Option<usize> {
        self.options
            .iter()
            .enumerate()
            .filter(|(_, o)| o.deadline >= completion)
            .min_by_key(|(j, o)| (o.deadline, *j))
            .map(|(j, _)| j)
    }
}

/// A complete auction problem.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    /// Number of slots `S`.
    pub horizon: Slot,
    /// Capacity per resource type, milli-units. Its length is `M`.
    pub capacities: Vec<u32>,
    pub bids: Vec<Bid>,
    pub seed: u64,
}

impl Instance {
    /// An instance with `num_resources` resources at [`FULL_CAPACITY`].
    pub fn new(horizon: Slot, num_resources: usize, bids: Vec<Bid>) -> Self {
        Self {
            horizon,
            capacities: vec![FULL_CAPACITY; num_resources],
            bids,
            seed: 0,
        }
    }

    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn num_users(&self) -> usize {
        self.bids.len()
    }

    /// Bids indexed by `user_id`. Assumes a validated instance.
    pub fn bids_by_user(&self) -> Vec<&Bid> {
        let mut out: Vec<&Bid> = self.bids.iter().collect();
        out.sort_by_key(|b| b.user_id);
        out
    }

    /// Stable 64-bit digest of the canonical file form.
    pub fn digest(&self) -> u64 {
        use std::hash::Hasher;
        let mut h = fnv::FnvHasher::default();
        h.write(emit_instance(self).as_bytes());
        h.finish()
    }
}

/// Final state of one user in a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Won {
        option: usize,
        completion: Slot,
        payment: Price,
    },
    Rejected,
}

impl Outcome {
    pub fn is_won(&self) -> bool {
        matches!(self, Outcome::Won { .. })
    }

    pub fn payment(&self) -> Price {
        match self {
            Outcome::Won { payment, .. } => *payment,
            Outcome::Rejected => 0,
        }
    }
}

/// The `y` decision (slots per user) together with the `x` decision
/// (which option, if any, each user won). Both vectors are indexed by
/// `user_id`; slot lists are sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub assignments: Vec<Vec<Slot>>,
    pub outcomes: Vec<Outcome>,
}

impl Schedule {
    pub fn all_rejected(num_users: usize) -> Self {
        Self {
            assignments: vec![Vec::new(); num_users],
            outcomes: vec![Outcome::Rejected; num_users],
        }
    }

    pub fn accepted_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_won()).count()
    }

    /// Per-slot, per-resource usage implied by the won users' slots.
    /// Indexed `[slot - 1][resource]`.
    pub fn usage(&self, inst: &Instance) -> Vec<Vec<u64>> {
        let mut usage = vec![vec![0u64; inst.num_resources()]; inst.horizon as usize];
        for bid in &inst.bids {
            let Some(slots) = self.assignments.get(bid.user_id) else {
                continue;
            };
            if !self.outcomes.get(bid.user_id).is_some_and(Outcome::is_won) {
                continue;
            }
            for &t in slots {
                if t == 0 || t > inst.horizon {
                    continue;
                }
                for (m, &r) in bid.demand.amounts().iter().enumerate() {
                    if let Some(u) = usage[t as usize - 1].get_mut(m) {
                        *u += u64::from(r);
                    }
                }
            }
        }
        usage
    }
}

/// Social welfare: the sum of the won options' prices.
pub fn welfare(inst: &Instance, sched: &Schedule) -> Price {
    inst.bids
        .iter()
        .filter_map(|b| match sched.outcomes.get(b.user_id) {
            Some(Outcome::Won { option, .. }) => b.options.get(*option).map(|o| o.price),
            _ => None,
        })
        .sum()
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Won {
                option,
                completion,
                payment,
            } => write!(f, "won option {option} at slot {completion} paying {payment}"),
            Outcome::Rejected => f.write_str("rejected"),
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn bid(user: usize, arrival: Slot, slots: u32, demand: &[u32], options: &[(Slot, Price)]) -> Bid {
        Bid {
            user_id: user,
            arrival,
            slots_required: slots,
            demand: ResourceDemand::new(demand.to_vec()),
            options: options.iter().map(|&(e, p)| DeadlineOption::new(e, p)).collect(),
        }
    }

    /// Two users, one resource, both demanding 600 of 1000.
    pub fn instance_x() -> Instance {
        Instance::new(
            5,
            1,
            vec![
                bid(0, 1, 2, &[600], &[(2, 10), (4, 6)]),
                bid(1, 1, 2, &[600], &[(3, 8), (5, 5)]),
            ],
        )
    }
}
