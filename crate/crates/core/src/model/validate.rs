use std::fmt;

use super::{Instance, Outcome, Price, Schedule, Slot};

/// A broken structural rule. Violations are data: validation never fails,
/// it reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyHorizon,
    NoResources,
    ZeroCapacity { resource: usize },
    UserIdOutOfRange { user: usize, num_users: usize },
    DuplicateUserId { user: usize },
    DemandLength { user: usize, expected: usize, found: usize },
    ZeroDemand { user: usize, resource: usize },
    DemandExceedsCapacity { user: usize, resource: usize, amount: u32, capacity: u32 },
    ArrivalOutOfRange { user: usize, arrival: Slot },
    ZeroSlotsRequired { user: usize },
    NoOptions { user: usize },
    DeadlineBeyondHorizon { user: usize, option: usize, deadline: Slot },
    OptionUnachievable { user: usize, option: usize, deadline: Slot, earliest: Slot },
    DeadlinesNotIncreasing { user: usize, option: usize },

    ScheduleShape { users: usize, assignments: usize, outcomes: usize },
    UnknownOption { user: usize, option: usize },
    WrongSlotCount { user: usize, required: u32, assigned: usize },
    RejectedHoldsSlots { user: usize, assigned: usize },
    DuplicateSlot { user: usize, slot: Slot },
    BeforeArrival { user: usize, slot: Slot, arrival: Slot },
    AfterDeadline { user: usize, slot: Slot, deadline: Slot },
    CompletionMismatch { user: usize, reported: Slot, actual: Slot },
    PaymentMismatch { user: usize, reported: Price, price: Price },
    CapacityExceeded { slot: Slot, resource: usize, usage: u64, capacity: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyHorizon => f.write_str("horizon must be at least one slot"),
            NoResources => f.write_str("at least one resource type is required"),
            ZeroCapacity { resource } => write!(f, "resource {resource}: capacity is zero"),
            UserIdOutOfRange { user, num_users } => {
                write!(f, "user {user}: id outside 0..{num_users}")
            }
            DuplicateUserId { user } => write!(f, "user {user}: id appears more than once"),
            DemandLength { user, expected, found } => {
                write!(f, "user {user}: demand has {found} entries, expected {expected}")
            }
            ZeroDemand { user, resource } => {
                write!(f, "user {user}: demand for resource {resource} is zero")
            }
            DemandExceedsCapacity { user, resource, amount, capacity } => write!(
                f,
                "user {user}: demand {amount} exceeds capacity {capacity} of resource {resource}"
            ),
            ArrivalOutOfRange { user, arrival } => {
                write!(f, "user {user}: arrival {arrival} outside the horizon")
            }
            ZeroSlotsRequired { user } => write!(f, "user {user}: slots_required must be >= 1"),
            NoOptions { user } => write!(f, "user {user}: bid has no deadline options"),
            DeadlineBeyondHorizon { user, option, deadline } => {
                write!(f, "user {user} option {option}: deadline {deadline} beyond the horizon")
            }
            OptionUnachievable { user, option, deadline, earliest } => write!(
                f,
                "user {user} option {option}: option unachievable, deadline {deadline} before earliest completion {earliest}"
            ),
            DeadlinesNotIncreasing { user, option } => {
                write!(f, "user {user} option {option}: deadlines must strictly increase")
            }
            ScheduleShape { users, assignments, outcomes } => write!(
                f,
                "schedule covers {assignments} assignment rows and {outcomes} outcomes for {users} users"
            ),
            UnknownOption { user, option } => write!(f, "user {user}: won unknown option {option}"),
            WrongSlotCount { user, required, assigned } => {
                write!(f, "user {user}: {assigned} slots assigned, {required} required")
            }
            RejectedHoldsSlots { user, assigned } => {
                write!(f, "user {user}: rejected but holds {assigned} slots")
            }
            DuplicateSlot { user, slot } => write!(f, "user {user}: slot {slot} assigned twice"),
            BeforeArrival { user, slot, arrival } => {
                write!(f, "user {user}: slot {slot} precedes arrival {arrival}")
            }
            AfterDeadline { user, slot, deadline } => {
                write!(f, "user {user}: deadline violated, slot {slot} after deadline {deadline}")
            }
            CompletionMismatch { user, reported, actual } => write!(
                f,
                "user {user}: reported completion {reported}, last assigned slot is {actual}"
            ),
            PaymentMismatch { user, reported, price } => {
                write!(f, "user {user}: payment {reported} differs from option price {price}")
            }
            CapacityExceeded { slot, resource, usage, capacity } => write!(
                f,
                "capacity at slot {slot}, resource {resource}: usage {usage} > {capacity}"
            ),
        }
    }
}

/// Non-fatal findings: the instance is usable but unusual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    PriceIncreasesWithDeadline { user: usize, option: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::PriceIncreasesWithDeadline { user, option } => write!(
                f,
                "user {user} option {option}: price rises although the deadline is later"
            ),
        }
    }
}

pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.horizon == 0 {
        out.push(Violation::EmptyHorizon);
    }
    if inst.capacities.is_empty() {
        out.push(Violation::NoResources);
    }
    for (m, &c) in inst.capacities.iter().enumerate() {
        if c == 0 {
            out.push(Violation::ZeroCapacity { resource: m });
        }
    }

    let n = inst.bids.len();
    let mut seen = vec![false; n];
    for bid in &inst.bids {
        let user = bid.user_id;
        if user >= n {
            out.push(Violation::UserIdOutOfRange { user, num_users: n });
        } else if std::mem::replace(&mut seen[user], true) {
            out.push(Violation::DuplicateUserId { user });
        }

        if bid.demand.len() != inst.num_resources() {
            out.push(Violation::DemandLength {
                user,
                expected: inst.num_resources(),
                found: bid.demand.len(),
            });
        }
        for (m, (&amount, &capacity)) in bid.demand.amounts().iter().zip(&inst.capacities).enumerate() {
            if amount == 0 {
                out.push(Violation::ZeroDemand { user, resource: m });
            } else if amount > capacity {
                out.push(Violation::DemandExceedsCapacity { user, resource: m, amount, capacity });
            }
        }

        if bid.arrival == 0 || bid.arrival > inst.horizon {
            out.push(Violation::ArrivalOutOfRange { user, arrival: bid.arrival });
        }
        if bid.slots_required == 0 {
            out.push(Violation::ZeroSlotsRequired { user });
        }
        if bid.options.is_empty() {
            out.push(Violation::NoOptions { user });
        }
        let earliest = bid.arrival + bid.slots_required.saturating_sub(1);
        let mut prev: Option<Slot> = None;
        for (j, opt) in bid.options.iter().enumerate() {
            if opt.deadline > inst.horizon {
                out.push(Violation::DeadlineBeyondHorizon { user, option: j, deadline: opt.deadline });
            }
            if opt.deadline < earliest {
                out.push(Violation::OptionUnachievable {
                    user,
                    option: j,
                    deadline: opt.deadline,
                    earliest,
                });
            }
            if prev.is_some_and(|p| opt.deadline <= p) {
                out.push(Violation::DeadlinesNotIncreasing { user, option: j });
            }
            prev = Some(opt.deadline);
        }
    }
    out
}

/// Options whose price exceeds that of an earlier (tighter) option.
pub fn price_warnings(inst: &Instance) -> Vec<Warning> {
    inst.bids
        .iter()
        .flat_map(|bid| {
            bid.options
                .windows(2)
                .enumerate()
                .filter(|(_, w)| w[1].price > w[0].price)
                .map(move |(j, _)| Warning::PriceIncreasesWithDeadline {
                    user: bid.user_id,
                    option: j + 1,
                })
        })
        .collect()
}

/// Checks a schedule against the XOR, window, slot-count and capacity
/// constraints. Assumes `validate_instance(inst)` is empty.
pub fn validate_schedule(inst: &Instance, sched: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.num_users();
    if sched.assignments.len() != n || sched.outcomes.len() != n {
        out.push(Violation::ScheduleShape {
            users: n,
            assignments: sched.assignments.len(),
            outcomes: sched.outcomes.len(),
        });
        return out;
    }

    for bid in &inst.bids {
        let user = bid.user_id;
        let slots = &sched.assignments[user];
        match sched.outcomes[user] {
            Outcome::Rejected => {
                if !slots.is_empty() {
                    out.push(Violation::RejectedHoldsSlots { user, assigned: slots.len() });
                }
            }
            Outcome::Won { option, completion, payment } => {
                let Some(opt) = bid.options.get(option) else {
                    out.push(Violation::UnknownOption { user, option });
                    continue;
                };
                if slots.len() != bid.slots_required as usize {
                    out.push(Violation::WrongSlotCount {
                        user,
                        required: bid.slots_required,
                        assigned: slots.len(),
                    });
                }
                let mut sorted = slots.clone();
                sorted.sort_unstable();
                for w in sorted.windows(2) {
                    if w[0] == w[1] {
                        out.push(Violation::DuplicateSlot { user, slot: w[0] });
                    }
                }
                for &t in &sorted {
                    if t < bid.arrival {
                        out.push(Violation::BeforeArrival { user, slot: t, arrival: bid.arrival });
                    }
                    if t > opt.deadline {
                        out.push(Violation::AfterDeadline { user, slot: t, deadline: opt.deadline });
                    }
                }
                if let Some(&last) = sorted.last() {
                    if last != completion {
                        out.push(Violation::CompletionMismatch { user, reported: completion, actual: last });
                    }
                }
                if payment != opt.price {
                    out.push(Violation::PaymentMismatch { user, reported: payment, price: opt.price });
                }
            }
        }
    }

    for (idx, row) in sched.usage(inst).iter().enumerate() {
        for (m, (&usage, &capacity)) in row.iter().zip(&inst.capacities).enumerate() {
            if usage > u64::from(capacity) {
                out.push(Violation::CapacityExceeded {
                    slot: idx as Slot + 1,
                    resource: m,
                    usage,
                    capacity,
                });
            }
        }
    }
    out
}
