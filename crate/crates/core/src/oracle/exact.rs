//! Exact optimum, one group of interacting users at a time.
//!
//! Groups whose open windows overlap little go to the slot-by-slot program
//! in `timeline`; the others to the branch and bound below.
//!
//! # Branch and bound over option choices
//!
//! Users whose widest windows do not overlap (transitively) never interact,
//! so each such group is solved on its own and the optima are added. Inside
//! a group the search fixes one user per level: each deadline option in
//! descending price order, then rejection. A branch survives only while the
//! chosen jobs can still be packed (see `packing`) and while its upper
//! bound beats the incumbent.
//!
//! The upper bound is the smaller of
//! - the sum of the best prices of the undecided users, and
//! - for a few time intervals `I` and every resource, the prices of the
//!   undecided users that need no work inside `I`, plus a fractional
//!   knapsack of the others into the capacity of `I` left by the chosen
//!   jobs. A job with window `W` and `s` slots needs at least
//!   `max(0, s - |W \ I|)` slots inside `I`.

use std::cmp::Ordering;
use std::time::Instant;

use super::packing::{pack, Budget, PackJob, Packed};
use super::timeline::{self, state_estimate};
use super::{OracleError, OracleLimits, OracleResult, OracleStatus};
use crate::engine::{run_offline, EngineConfig, Strategy};
use crate::model::{validate_instance, Bid, Instance, Outcome, Price, Schedule, Slot};

/// Intervals kept for the volume bound.
const BOUND_INTERVALS: usize = 32;
/// Groups whose per-slot state estimate stays below this use the program.
const TIMELINE_STATES: f64 = 1e12;

#[derive(Clone, Debug)]
struct Cand {
    user: usize,
    arrival: Slot,
    slots: u32,
    demand: Vec<u32>,
    /// Undominated options as `(deadline, price, index in the bid)`, by
    /// descending price.
    options: Vec<(Slot, Price, usize)>,
    best: Price,
    latest: Slot,
}

impl Cand {
    fn from_bid(bid: &Bid) -> Self {
        // keep an option only if every later deadline pays strictly less
        let mut by_deadline: Vec<(Slot, Price, usize)> = bid
            .options
            .iter()
            .enumerate()
            .map(|(j, o)| (o.deadline, o.price, j))
            .collect();
        by_deadline.sort_by_key(|&(e, p, j)| (std::cmp::Reverse(e), std::cmp::Reverse(p), j));
        let mut options = Vec::new();
        let mut ceiling: Option<Price> = None;
        for (e, p, j) in by_deadline {
            if ceiling.is_none_or(|c| p > c) {
                options.push((e, p, j));
                ceiling = Some(p);
            }
        }
        options.sort_by_key(|&(e, p, j)| (std::cmp::Reverse(p), e, j));
        Self {
            user: bid.user_id,
            arrival: bid.arrival,
            slots: bid.slots_required,
            demand: bid.demand.amounts().to_vec(),
            best: options.first().map_or(0, |o| o.1),
            latest: bid.latest_deadline(),
            options,
        }
    }

    fn timeline_job(&self) -> timeline::Job {
        timeline::Job {
            arrival: self.arrival,
            latest: self.latest,
            slots: self.slots,
            demand: self.demand.clone(),
            options: self.options.iter().map(|o| (o.0, o.1)).collect(),
        }
    }

    /// Best option for a job finishing at `finish`: highest price, then
    /// earliest deadline.
    fn option_for(&self, finish: Slot) -> (Price, usize) {
        self.options
            .iter()
            .filter(|o| o.0 >= finish)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|o| (o.1, o.2))
            .expect("completion within the latest deadline")
    }

    fn job(&self, deadline: Slot) -> PackJob {
        PackJob {
            arrival: self.arrival,
            deadline,
            slots: self.slots,
            demand: self.demand.clone(),
        }
    }

    /// `best / (sum of demand * slots)`, compared exactly.
    fn density_cmp(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.best) * u128::from(other.volume());
        let rhs = u128::from(other.best) * u128::from(self.volume());
        lhs.cmp(&rhs)
    }

    fn volume(&self) -> u64 {
        u64::from(self.slots) * self.demand.iter().map(|&d| u64::from(d)).sum::<u64>().max(1)
    }
}

/// An interval with, per resource, the candidates that must work inside it
/// sorted by value per unit of mandatory volume.
struct BoundInterval {
    lo: Slot,
    hi: Slot,
    /// `[resource] -> (position, mandatory volume)`, best density first.
    items: Vec<Vec<(usize, u64)>>,
    /// Mandatory slots of each candidate's widest window.
    mandatory: Vec<u32>,
}

struct Group<'a> {
    cands: Vec<Cand>,
    caps: &'a [u32],
    suffix_best: Vec<Price>,
    intervals: Vec<BoundInterval>,
    /// Chosen option position per candidate (valid below the current depth).
    choice: Vec<Option<usize>>,
    /// Current packing of the chosen candidates.
    slots: Vec<Vec<Slot>>,
    usage: Vec<Vec<u64>>,
    best_value: Price,
    best_choice: Vec<Option<usize>>,
    best_slots: Vec<Vec<Slot>>,
}

fn mandatory(arrival: Slot, deadline: Slot, slots: u32, lo: Slot, hi: Slot) -> u32 {
    PackJob {
        arrival,
        deadline,
        slots,
        demand: Vec::new(),
    }
    .mandatory_in(lo, hi)
}

impl<'a> Group<'a> {
    fn new(mut cands: Vec<Cand>, caps: &'a [u32], horizon: Slot) -> Self {
        cands.sort_by(|a, b| b.density_cmp(a).then(b.best.cmp(&a.best)).then(a.user.cmp(&b.user)));
        let n = cands.len();
        let mut suffix_best = vec![0; n + 1];
        for k in (0..n).rev() {
            suffix_best[k] = suffix_best[k + 1] + cands[k].best;
        }
        let mut group = Self {
            caps,
            suffix_best,
            intervals: Vec::new(),
            choice: vec![None; n],
            slots: vec![Vec::new(); n],
            usage: vec![vec![0; caps.len()]; horizon as usize + 1],
            best_value: 0,
            best_choice: vec![None; n],
            best_slots: vec![Vec::new(); n],
            cands,
        };
        group.intervals = group.select_intervals();
        group
    }

    fn build_interval(&self, lo: Slot, hi: Slot) -> BoundInterval {
        let mandatory: Vec<u32> = self
            .cands
            .iter()
            .map(|c| mandatory(c.arrival, c.latest, c.slots, lo, hi))
            .collect();
        let items = (0..self.caps.len())
            .map(|m| {
                let mut list: Vec<(usize, u64)> = self
                    .cands
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mandatory[*k] > 0)
                    .map(|(k, c)| (k, u64::from(mandatory[k]) * u64::from(c.demand[m])))
                    .collect();
                list.sort_by(|&(ka, wa), &(kb, wb)| {
                    let lhs = u128::from(self.cands[ka].best) * u128::from(wb);
                    let rhs = u128::from(self.cands[kb].best) * u128::from(wa);
                    rhs.cmp(&lhs).then(ka.cmp(&kb))
                });
                list
            })
            .collect();
        BoundInterval { lo, hi, items, mandatory }
    }

    fn select_intervals(&self) -> Vec<BoundInterval> {
        let mut lows: Vec<Slot> = self.cands.iter().map(|c| c.arrival).collect();
        let mut highs: Vec<Slot> = self
            .cands
            .iter()
            .flat_map(|c| c.options.iter().map(|o| o.0))
            .collect();
        lows.sort_unstable();
        lows.dedup();
        highs.sort_unstable();
        highs.dedup();
        let mut scored: Vec<(Price, BoundInterval)> = Vec::new();
        for &lo in &lows {
            for &hi in highs.iter().filter(|&&h| h >= lo) {
                let iv = self.build_interval(lo, hi);
                let b = self.interval_bound(&iv, 0);
                if b < self.suffix_best[0] {
                    scored.push((b, iv));
                }
            }
        }
        scored.sort_by_key(|(b, iv)| (*b, iv.lo, iv.hi));
        scored.truncate(BOUND_INTERVALS);
        scored.into_iter().map(|(_, iv)| iv).collect()
    }

    /// Upper bound on the welfare of candidates `k..` given the choices of
    /// candidates `..k`, using one interval.
    fn interval_bound(&self, iv: &BoundInterval, k: usize) -> Price {
        let len = u64::from(iv.hi - iv.lo + 1);
        let free: Price = (k..self.cands.len())
            .filter(|&i| iv.mandatory[i] == 0)
            .map(|i| self.cands[i].best)
            .sum();
        let mut bound = Price::MAX;
        for (m, items) in iv.items.iter().enumerate() {
            let mut cap = u64::from(self.caps[m]) * len;
            for (i, c) in self.cands[..k].iter().enumerate() {
                if let Some(o) = self.choice[i] {
                    let need = mandatory(c.arrival, c.options[o].0, c.slots, iv.lo, iv.hi);
                    cap = cap.saturating_sub(u64::from(need) * u64::from(c.demand[m]));
                }
            }
            let mut value: Price = 0;
            for &(i, w) in items.iter().filter(|(i, _)| *i >= k) {
                let p = self.cands[i].best;
                if w <= cap {
                    cap -= w;
                    value += p;
                } else {
                    value += (u128::from(p) * u128::from(cap) / u128::from(w)) as Price;
                    break;
                }
            }
            bound = bound.min(free + value);
        }
        bound
    }

    fn upper_bound(&self, k: usize) -> Price {
        self.intervals
            .iter()
            .map(|iv| self.interval_bound(iv, k))
            .fold(self.suffix_best[k], Price::min)
    }

    fn fits_at(&self, t: Slot, k: usize) -> bool {
        self.usage[t as usize]
            .iter()
            .zip(&self.cands[k].demand)
            .zip(self.caps)
            .all(|((&u, &d), &c)| u + u64::from(d) <= u64::from(c))
    }

    fn place(&mut self, k: usize, slots: Vec<Slot>) {
        for &t in &slots {
            for (u, &d) in self.usage[t as usize].iter_mut().zip(&self.cands[k].demand) {
                *u += u64::from(d);
            }
        }
        self.slots[k] = slots;
    }

    fn unplace(&mut self, k: usize) {
        for t in std::mem::take(&mut self.slots[k]) {
            for (u, &d) in self.usage[t as usize].iter_mut().zip(&self.cands[k].demand) {
                *u -= u64::from(d);
            }
        }
    }

    /// Earliest slots with room for candidate `k` under the current packing.
    fn quick_slots(&self, k: usize, deadline: Slot) -> Option<Vec<Slot>> {
        let c = &self.cands[k];
        let slots: Vec<Slot> = (c.arrival..=deadline)
            .filter(|&t| self.fits_at(t, k))
            .take(c.slots as usize)
            .collect();
        (slots.len() == c.slots as usize).then_some(slots)
    }

    /// Tries to add candidate `k` with option `o`. On success returns the
    /// packing to restore on backtrack (`None` when only `k` was placed).
    fn try_add(&mut self, k: usize, o: usize, budget: &mut Budget) -> Result<Option<Option<Vec<Vec<Slot>>>>, ()> {
        let deadline = self.cands[k].options[o].0;
        if let Some(slots) = self.quick_slots(k, deadline) {
            self.place(k, slots);
            self.choice[k] = Some(o);
            return Ok(Some(None));
        }
        let members: Vec<usize> = (0..k).filter(|&i| self.choice[i].is_some()).collect();
        let mut jobs: Vec<PackJob> = members
            .iter()
            .map(|&i| {
                let c = &self.cands[i];
                c.job(c.options[self.choice[i].expect("member")].0)
            })
            .collect();
        jobs.push(self.cands[k].job(deadline));
        match pack(&jobs, self.caps, budget) {
            Packed::Feasible(new_slots) => {
                let saved: Vec<Vec<Slot>> = self.slots.clone();
                for &i in &members {
                    self.unplace(i);
                }
                for (pos, slots) in new_slots.into_iter().enumerate() {
                    let i = members.get(pos).copied().unwrap_or(k);
                    self.place(i, slots);
                }
                self.choice[k] = Some(o);
                Ok(Some(Some(saved)))
            }
            Packed::Infeasible => Ok(None),
            Packed::OutOfBudget => Err(()),
        }
    }

    fn undo_add(&mut self, k: usize, restore: Option<Vec<Vec<Slot>>>) {
        self.choice[k] = None;
        match restore {
            None => self.unplace(k),
            Some(saved) => {
                let members: Vec<usize> = (0..=k).filter(|&i| !self.slots[i].is_empty()).collect();
                for i in members {
                    self.unplace(i);
                }
                for (i, slots) in saved.into_iter().enumerate() {
                    if !slots.is_empty() {
                        self.place(i, slots);
                    }
                }
            }
        }
    }

    fn record(&mut self, value: Price) {
        if value > self.best_value || self.best_choice.iter().all(Option::is_none) {
            self.best_value = value;
            self.best_choice = self.choice.clone();
            self.best_slots = self.slots.clone();
        }
    }

    /// Greedy incumbent: candidates in branching order, best fitting option.
    fn seed_incumbent(&mut self) {
        let mut value = 0;
        for k in 0..self.cands.len() {
            for o in 0..self.cands[k].options.len() {
                if let Some(slots) = self.quick_slots(k, self.cands[k].options[o].0) {
                    self.place(k, slots);
                    self.choice[k] = Some(o);
                    value += self.cands[k].options[o].1;
                    break;
                }
            }
        }
        self.record(value);
        for k in 0..self.cands.len() {
            self.choice[k] = None;
            self.unplace(k);
        }
    }

    /// Returns false if the budget ran out.
    fn search(&mut self, k: usize, value: Price, budget: &mut Budget) -> bool {
        if !budget.tick() {
            return false;
        }
        if k == self.cands.len() {
            if value > self.best_value {
                self.record(value);
            }
            return true;
        }
        if value + self.upper_bound(k) <= self.best_value {
            return true;
        }
        for o in 0..self.cands[k].options.len() {
            let price = self.cands[k].options[o].1;
            if value + price + self.suffix_best[k + 1] <= self.best_value {
                break;
            }
            match self.try_add(k, o, budget) {
                Ok(Some(restore)) => {
                    let ok = self.search(k + 1, value + price, budget);
                    self.undo_add(k, restore);
                    if !ok {
                        return false;
                    }
                }
                Ok(None) => {}
                Err(()) => return false,
            }
        }
        self.search(k + 1, value, budget)
    }
}

/// Splits candidates into groups whose widest windows chain together.
fn groups(mut cands: Vec<Cand>) -> Vec<Vec<Cand>> {
    cands.sort_by_key(|c| (c.arrival, c.user));
    let mut out: Vec<Vec<Cand>> = Vec::new();
    let mut end: Slot = 0;
    for c in cands {
        match out.last_mut() {
            Some(g) if c.arrival <= end => {
                end = end.max(c.latest);
                g.push(c);
            }
            _ => {
                end = c.latest;
                out.push(vec![c]);
            }
        }
    }
    out
}

/// Which exact method handles each group. Only tests force a method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum Method {
    /// By the state estimate of the group.
    Auto,
    BranchAndBound,
    Timeline,
}

impl Method {
    fn timeline(self, jobs: &[timeline::Job]) -> bool {
        match self {
            Method::Auto => state_estimate(jobs) <= TIMELINE_STATES,
            Method::BranchAndBound => false,
            Method::Timeline => true,
        }
    }
}

/// Per-user payments under each eviction heuristic. Restricted to a group
/// they form a feasible schedule, so their sum is a lower bound on its
/// optimum.
fn heuristic_payments(inst: &Instance) -> Vec<Vec<Price>> {
    [Strategy::Truem, Strategy::Trwaem]
        .into_iter()
        .filter_map(|strategy| run_offline(inst, &EngineConfig::new(strategy)).ok())
        .map(|(sched, _)| {
            sched
                .outcomes
                .iter()
                .map(|o| match o {
                    Outcome::Won { payment, .. } => *payment,
                    _ => 0,
                })
                .collect()
        })
        .collect()
}

/// Maximum welfare over all feasible schedules.
pub fn solve_exact(inst: &Instance, limits: &OracleLimits) -> Result<OracleResult, OracleError> {
    solve_with(inst, limits, Method::Auto)
}

pub(crate) fn solve_with(inst: &Instance, limits: &OracleLimits, method: Method) -> Result<OracleResult, OracleError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(OracleError::InvalidInstance(violations));
    }
    if inst.num_users() > limits.max_users {
        return Err(OracleError::TooManyUsers {
            users: inst.num_users(),
            limit: limits.max_users,
        });
    }
    let started = Instant::now();
    let mut budget = Budget::new(limits.max_nodes, started + limits.timeout);
    let cands: Vec<Cand> = inst.bids.iter().map(Cand::from_bid).collect();
    let payments = heuristic_payments(inst);

    let mut total = 0;
    let mut complete = true;
    let mut witness = Schedule::all_rejected(inst.num_users());
    for members in groups(cands) {
        let jobs: Vec<timeline::Job> = members.iter().map(Cand::timeline_job).collect();
        if complete && method.timeline(&jobs) {
            let floor = payments
                .iter()
                .map(|paid| members.iter().map(|c| paid[c.user]).sum::<Price>())
                .max()
                .unwrap_or(0);
            if let Some((value, held)) = timeline::solve(&jobs, &inst.capacities, floor, &mut budget) {
                total += value;
                for (c, slots) in members.iter().zip(held) {
                    if let Some(&finish) = slots.last() {
                        let (payment, option) = c.option_for(finish);
                        witness.assignments[c.user] = slots;
                        witness.outcomes[c.user] = Outcome::Won { option, completion: finish, payment };
                    }
                }
                continue;
            }
            complete = false;
        }
        let mut group = Group::new(members, &inst.capacities, inst.horizon);
        group.seed_incumbent();
        if complete {
            complete = group.search(0, 0, &mut budget);
        }
        total += group.best_value;
        for (k, c) in group.cands.iter().enumerate() {
            if let Some(o) = group.best_choice[k] {
                let (_, price, j) = c.options[o];
                let slots = group.best_slots[k].clone();
                let completion = *slots.last().expect("chosen jobs hold slots");
                witness.assignments[c.user] = slots;
                witness.outcomes[c.user] = Outcome::Won { option: j, completion, payment: price };
            }
        }
    }

    let result = OracleResult {
        optimum_welfare: total,
        witness,
        nodes_explored: budget.nodes,
        elapsed: started.elapsed(),
        status: if complete { OracleStatus::Optimal } else { OracleStatus::LimitExceeded },
        instance_digest: inst.digest(),
    };
    if complete {
        Ok(result)
    } else {
        Err(OracleError::LimitExceeded(Box::new(result)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::bid;

    #[test]
    fn dominated_options_are_dropped() {
        let c = Cand::from_bid(&bid(0, 1, 1, &[10], &[(2, 5), (3, 5), (4, 7), (6, 1)]));
        // (2,5) and (3,5) are dominated by (4,7)
        assert_eq!(c.options, vec![(4, 7, 2), (6, 1, 3)]);
        assert_eq!(c.best, 7);
    }

    #[test]
    fn groups_split_on_gaps() {
        let cands: Vec<Cand> = [
            bid(0, 1, 2, &[1], &[(3, 1)]),
            bid(1, 3, 1, &[1], &[(5, 1)]),
            bid(2, 6, 1, &[1], &[(7, 1)]),
        ]
        .iter()
        .map(Cand::from_bid)
        .collect();
        let g = groups(cands);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].len(), 2);
    }

    #[test]
    fn volume_bound_is_valid_on_a_crowded_interval() {
        let cands: Vec<Cand> = (0..4)
            .map(|i| Cand::from_bid(&bid(i, 1, 2, &[600], &[(2, 10)])))
            .collect();
        let caps = [1000];
        let g = Group::new(cands, &caps, 4);
        // only one job fits into [1, 2]; fractional relaxation allows 1000/1200
        assert!(g.upper_bound(0) >= 10);
        assert!(g.upper_bound(0) < 40);
    }
}
