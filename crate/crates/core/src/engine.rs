//! Slot-by-slot allocation, evaluation and action.
//!
//! At each slot every live user that has arrived is tentatively placed
//! (allocation). While any resource is over capacity, the configured
//! strategy picks a victim among the users placed at that slot and removes
//! it (evaluation). An evicted user competes again at the next slot, unless
//! no deadline option can be met any more, in which case it is rejected and
//! every slot it held is released (action). Users that finish are settled at
//! their completion slot.
//!
//! The engine only learns about a bid at its arrival slot, which makes the
//! offline run and the soft-acceptance protocol the same computation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::time::Instant;

use crate::evaluators::{self, EvictionChoice, StrategyTag, Value, ValueAssessment};
use crate::metrics::{RunReport, Settlement};
use crate::model::{validate_instance, Bid, Instance, Outcome, Price, Schedule, Slot, Violation};
use crate::online::settle_payment;

/// Victim selection rule.
#[derive(Clone, Copy, Debug)]
pub enum Strategy {
    Truem,
    Trwaem,
    /// Returns the position of the victim within the candidate slice.
    Custom(fn(&[ValueAssessment]) -> Option<usize>),
}

impl Strategy {
    pub fn tag(&self) -> StrategyTag {
        match self {
            Strategy::Truem => StrategyTag::Truem,
            Strategy::Trwaem => StrategyTag::Trwaem,
            Strategy::Custom(_) => StrategyTag::Custom,
        }
    }

    pub fn select(&self, candidates: &[ValueAssessment]) -> Option<EvictionChoice> {
        match self {
            Strategy::Truem => evaluators::select_victim_truem(candidates),
            Strategy::Trwaem => evaluators::select_victim_trwaem(candidates),
            Strategy::Custom(f) => {
                let pos = f(candidates)?;
                let a = candidates.get(pos)?;
                Some(EvictionChoice {
                    victim_user_id: a.user_id,
                    strategy_tag: StrategyTag::Custom,
                    minimum_value: a.weighted_density,
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    pub strategy: Strategy,
    /// Evictions a user may suffer before it is rejected. `None` is unbounded.
    pub max_moves_per_user: Option<u32>,
}

impl EngineConfig {
    pub fn new(strategy: Strategy) -> Self {
        Self { strategy, max_moves_per_user: None }
    }
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid instance: {}", .0.first().map(ToString::to_string).unwrap_or_default())]
    InvalidInstance(Vec<Violation>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UserStatus {
    Live,
    Rejected,
    Completed { option: usize, completion: Slot, payment: Price },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserProgress {
    pub bid: Bid,
    pub slots_done: u32,
    /// Slots held so far, ascending.
    pub assigned: Vec<Slot>,
    pub status: UserStatus,
    pub moves: u32,
}

impl UserProgress {
    fn new(bid: Bid) -> Self {
        Self {
            bid,
            slots_done: 0,
            assigned: Vec::new(),
            status: UserStatus::Live,
            moves: 0,
        }
    }

    fn remaining(&self) -> u32 {
        self.bid.slots_required - self.slots_done
    }

    /// Whether the job can still meet some deadline if it runs in every
    /// slot starting at `t`.
    fn can_finish_from(&self, t: Slot) -> bool {
        t + self.remaining() - 1 <= self.bid.latest_deadline()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Allocate,
    Evict,
    Reject,
    Complete,
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceKind::Allocate => "allocate",
            TraceKind::Evict => "evict",
            TraceKind::Reject => "reject",
            TraceKind::Complete => "complete",
        })
    }
}

/// One engine event. `value` is the victim's compared density on evictions;
/// `option` and `payment` are set on completions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub slot: Slot,
    pub kind: TraceKind,
    pub user_id: usize,
    pub value: Option<Value>,
    pub option: Option<usize>,
    pub payment: Option<Price>,
}

pub const TRACE_HEADER: &str = "slot,event,user_id,value,option,payment";

pub fn trace_csv(events: &[TraceEvent]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for e in events {
        let value = e.value.map(|v| format!("{}/{}", v.numer(), v.denom())).unwrap_or_default();
        let option = e.option.map(|j| j.to_string()).unwrap_or_default();
        let payment = e.payment.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{value},{option},{payment}", e.slot, e.kind, e.user_id);
    }
    out
}

/// Everything the engine knows between slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineState {
    /// Next slot to process.
    pub t: Slot,
    pub horizon: Slot,
    pub capacities: Vec<u32>,
    /// Users that have arrived, keyed by id.
    pub users: BTreeMap<usize, UserProgress>,
    /// Ids of the users in `users` that are still live, ascending.
    pub live: BTreeSet<usize>,
    /// Usage ledger indexed `[slot - 1][resource]`.
    pub usage: Vec<Vec<u64>>,
    pub move_count: u64,
    pub trace: Vec<TraceEvent>,
}

impl EngineState {
    pub fn new(horizon: Slot, capacities: Vec<u32>) -> Self {
        let m = capacities.len();
        Self {
            t: 1,
            horizon,
            capacities,
            users: BTreeMap::new(),
            live: BTreeSet::new(),
            usage: vec![vec![0; m]; horizon as usize],
            move_count: 0,
            trace: Vec::new(),
        }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::new(inst.horizon, inst.capacities.clone())
    }

    pub fn is_done(&self) -> bool {
        self.t > self.horizon
    }

    fn add_usage(&mut self, slot: Slot, demand: &[u32]) {
        for (u, &r) in self.usage[slot as usize - 1].iter_mut().zip(demand) {
            *u += u64::from(r);
        }
    }

    fn sub_usage(&mut self, slot: Slot, demand: &[u32]) {
        for (u, &r) in self.usage[slot as usize - 1].iter_mut().zip(demand) {
            *u -= u64::from(r);
        }
    }

    fn overloaded(&self, slot: Slot) -> bool {
        self.usage[slot as usize - 1]
            .iter()
            .zip(&self.capacities)
            .any(|(&u, &c)| u > u64::from(c))
    }

    fn record(&mut self, slot: Slot, kind: TraceKind, user_id: usize) -> &mut TraceEvent {
        self.trace.push(TraceEvent {
            slot,
            kind,
            user_id,
            value: None,
            option: None,
            payment: None,
        });
        self.trace.last_mut().expect("just pushed")
    }

    fn reject(&mut self, user_id: usize, slot: Slot) {
        let Some(user) = self.users.get_mut(&user_id) else {
            return;
        };
        user.status = UserStatus::Rejected;
        self.live.remove(&user_id);
        let held = std::mem::take(&mut user.assigned);
        let demand = user.bid.demand.amounts().to_vec();
        for s in held {
            self.sub_usage(s, &demand);
        }
        self.record(slot, TraceKind::Reject, user_id);
    }

    /// Processes slot `t` with the bids arriving at `t`, then moves to `t + 1`.
    pub fn advance(&mut self, arrivals: impl IntoIterator<Item = Bid>, cfg: &EngineConfig) {
        let t = self.t;
        assert!(t <= self.horizon, "advance past the horizon");
        for bid in arrivals {
            self.live.insert(bid.user_id);
            self.users.insert(bid.user_id, UserProgress::new(bid));
        }

        // Allocation
        let live: Vec<usize> = self
            .live
            .iter()
            .copied()
            .filter(|id| self.users[id].bid.arrival <= t)
            .collect();
        let mut placed = Vec::with_capacity(live.len());
        for id in live {
            let user = &self.users[&id];
            if !user.can_finish_from(t) {
                self.reject(id, t);
                continue;
            }
            let demand = user.bid.demand.amounts().to_vec();
            self.users.get_mut(&id).expect("live user").assigned.push(t);
            self.add_usage(t, &demand);
            self.record(t, TraceKind::Allocate, id);
            placed.push(id);
        }

        // Evaluation and action
        if self.overloaded(t) {
            let mut candidates: Vec<ValueAssessment> = placed
                .iter()
                .map(|id| {
                    let u = &self.users[id];
                    evaluators::assess(&u.bid, t, u.slots_done)
                        .expect("placed users can still meet a deadline")
                })
                .collect();
            while self.overloaded(t) {
                let choice = cfg
                    .strategy
                    .select(&candidates)
                    .expect("an overloaded slot holds at least one user");
                let victim = choice.victim_user_id;
                candidates.retain(|a| a.user_id != victim);
                placed.retain(|&id| id != victim);

                let user = self.users.get_mut(&victim).expect("victim is known");
                user.assigned.pop();
                user.moves += 1;
                let moves = user.moves;
                let can_continue = t < self.horizon && user.can_finish_from(t + 1);
                let demand = user.bid.demand.amounts().to_vec();
                self.sub_usage(t, &demand);
                self.move_count += 1;
                self.record(t, TraceKind::Evict, victim).value = Some(choice.minimum_value);

                let over_cap = cfg.max_moves_per_user.is_some_and(|cap| moves > cap);
                if !can_continue || over_cap {
                    self.reject(victim, t);
                }
            }
        }

        // Progress and settlement
        for id in placed {
            let user = self.users.get_mut(&id).expect("placed user");
            user.slots_done += 1;
            if user.slots_done < user.bid.slots_required {
                continue;
            }
            match settle_payment(&user.bid, t) {
                Ok((option, payment)) => {
                    user.status = UserStatus::Completed { option, completion: t, payment };
                    self.live.remove(&id);
                    let ev = self.record(t, TraceKind::Complete, id);
                    ev.option = Some(option);
                    ev.payment = Some(payment);
                }
                Err(_) => self.reject(id, t),
            }
        }

        self.t += 1;
    }

    /// Schedule over `num_users` users. Users that never arrived, or are
    /// still live, count as rejected and hold no slots.
    pub fn schedule(&self, num_users: usize) -> Schedule {
        let mut sched = Schedule::all_rejected(num_users);
        for (&id, u) in &self.users {
            if let (UserStatus::Completed { option, completion, payment }, true) = (u.status, id < num_users) {
                sched.assignments[id] = u.assigned.clone();
                sched.outcomes[id] = Outcome::Won { option, completion, payment };
            }
        }
        sched
    }
}

/// Bids grouped by arrival slot, in ascending `user_id` within a slot.
pub(crate) fn arrivals_by_slot(inst: &Instance) -> Vec<Vec<Bid>> {
    let mut by_slot = vec![Vec::new(); inst.horizon as usize + 1];
    for bid in inst.bids_by_user() {
        if let Some(bucket) = by_slot.get_mut(bid.arrival as usize) {
            bucket.push(bid.clone());
        }
    }
    by_slot
}

/// Advances `state` by one slot, reading the bids that arrive at that slot
/// from `inst`.
pub fn step(mut state: EngineState, inst: &Instance, cfg: &EngineConfig) -> EngineState {
    let t = state.t;
    let arrivals: Vec<Bid> = inst
        .bids_by_user()
        .into_iter()
        .filter(|b| b.arrival == t)
        .cloned()
        .collect();
    state.advance(arrivals, cfg);
    state
}

/// Runs the engine over the whole horizon.
pub fn run_offline(inst: &Instance, cfg: &EngineConfig) -> Result<(Schedule, RunReport), EngineError> {
    let (sched, report, _) = run_traced(inst, cfg)?;
    Ok((sched, report))
}

/// Like [`run_offline`], also returning the engine's event trace.
pub fn run_traced(
    inst: &Instance,
    cfg: &EngineConfig,
) -> Result<(Schedule, RunReport, Vec<TraceEvent>), EngineError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(EngineError::InvalidInstance(violations));
    }
    let started = Instant::now();
    let mut arrivals = arrivals_by_slot(inst);
    let mut state = EngineState::for_instance(inst);
    while !state.is_done() {
        let batch = std::mem::take(&mut arrivals[state.t as usize]);
        state.advance(batch, cfg);
    }
    let sched = state.schedule(inst.num_users());
    let report = RunReport::from_schedule(inst, &sched, state.move_count, started.elapsed());
    Ok((sched, report, state.trace))
}

/// Settlements of completed users, ascending by id.
pub(crate) fn settlements(sched: &Schedule) -> Vec<Settlement> {
    sched
        .outcomes
        .iter()
        .enumerate()
        .filter_map(|(user_id, o)| match *o {
            Outcome::Won { option, completion, payment } => Some(Settlement {
                user_id,
                option,
                completion,
                payment,
            }),
            Outcome::Rejected => None,
        })
        .collect()
}
