//! Feasibility of a fixed set of jobs: can each job get its slot count
//! inside its window without exceeding any capacity in any slot?
//!
//! The search walks slots in order. At each slot, jobs whose remaining work
//! equals the slots left in their window must run; among the others only
//! maximal sets are tried (running an extra job earlier, when it fits, never
//! hurts: one of its later slots can always be moved forward). Failed
//! `(slot, remaining work)` states are memoized.

use std::collections::HashSet;
use std::time::Instant;

use crate::model::Slot;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(super) struct PackJob {
    pub arrival: Slot,
    pub deadline: Slot,
    pub slots: u32,
    pub demand: Vec<u32>,
}

impl PackJob {
    /// Slots this job must spend inside `[lo, hi]` in any packing.
    pub fn mandatory_in(&self, lo: Slot, hi: Slot) -> u32 {
        let len = self.deadline + 1 - self.arrival;
        let inside = self.deadline.min(hi).saturating_add(1).saturating_sub(self.arrival.max(lo));
        self.slots.saturating_sub(len - inside.min(len))
    }
}

/// Shared node and time budget.
#[derive(Debug)]
pub(super) struct Budget {
    pub nodes: u64,
    pub max_nodes: u64,
    pub deadline: Instant,
    pub exhausted: bool,
}

impl Budget {
    pub fn new(max_nodes: u64, deadline: Instant) -> Self {
        Self { nodes: 0, max_nodes, deadline, exhausted: false }
    }

    /// Counts one node; false once the budget is gone.
    pub fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes || (self.nodes % 256 == 0 && Instant::now() > self.deadline) {
            self.exhausted = true;
        }
        !self.exhausted
    }
}

#[derive(Debug, PartialEq, Eq)]
pub(super) enum Packed {
    Feasible(Vec<Vec<Slot>>),
    Infeasible,
    OutOfBudget,
}

/// Volume test over every `[arrival, deadline]` interval pair. Necessary,
/// not sufficient.
pub(super) fn volume_ok(jobs: &[PackJob], caps: &[u32]) -> bool {
    let mut lows: Vec<Slot> = jobs.iter().map(|j| j.arrival).collect();
    let mut highs: Vec<Slot> = jobs.iter().map(|j| j.deadline).collect();
    lows.sort_unstable();
    lows.dedup();
    highs.sort_unstable();
    highs.dedup();
    for &lo in &lows {
        for &hi in highs.iter().filter(|&&h| h >= lo) {
            let len = u64::from(hi - lo + 1);
            for (m, &c) in caps.iter().enumerate() {
                let need: u64 = jobs
                    .iter()
                    .map(|j| u64::from(j.mandatory_in(lo, hi)) * u64::from(j.demand[m]))
                    .sum();
                if need > u64::from(c) * len {
                    return false;
                }
            }
        }
    }
    true
}

struct Search<'a> {
    jobs: &'a [PackJob],
    caps: &'a [u32],
    remaining: Vec<u8>,
    slots: Vec<Vec<Slot>>,
    failed: HashSet<(Slot, Vec<u8>)>,
}

impl Search<'_> {
    fn fits(&self, load: &[u64], job: usize) -> bool {
        load.iter()
            .zip(&self.jobs[job].demand)
            .zip(self.caps)
            .all(|((&l, &d), &c)| l + u64::from(d) <= u64::from(c))
    }

    fn add(&self, load: &mut [u64], job: usize) {
        for (l, &d) in load.iter_mut().zip(&self.jobs[job].demand) {
            *l += u64::from(d);
        }
    }

    fn sub(&self, load: &mut [u64], job: usize) {
        for (l, &d) in load.iter_mut().zip(&self.jobs[job].demand) {
            *l -= u64::from(d);
        }
    }

    /// All maximal extensions of `chosen` using jobs from `optional[k..]`.
    fn maximal_sets(
        &self,
        optional: &[usize],
        k: usize,
        load: &mut Vec<u64>,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == optional.len() {
            let maximal = optional
                .iter()
                .all(|j| chosen.contains(j) || !self.fits(load, *j));
            if maximal {
                out.push(chosen.clone());
            }
            return;
        }
        let job = optional[k];
        if self.fits(load, job) {
            self.add(load, job);
            chosen.push(job);
            self.maximal_sets(optional, k + 1, load, chosen, out);
            chosen.pop();
            self.sub(load, job);
        }
        self.maximal_sets(optional, k + 1, load, chosen, out);
    }

    fn dfs(&mut self, from: Slot, budget: &mut Budget) -> Option<bool> {
        let pending: Vec<usize> = (0..self.jobs.len()).filter(|&j| self.remaining[j] > 0).collect();
        if pending.is_empty() {
            return Some(true);
        }
        let t = pending
            .iter()
            .map(|&j| self.jobs[j].arrival)
            .min()
            .expect("non-empty")
            .max(from);
        for &j in &pending {
            let job = &self.jobs[j];
            let start = job.arrival.max(t);
            if job.deadline < start || job.deadline - start + 1 < u32::from(self.remaining[j]) {
                return Some(false);
            }
        }
        if self.failed.contains(&(t, self.remaining.clone())) {
            return Some(false);
        }
        if !budget.tick() {
            return None;
        }

        let mut load = vec![0u64; self.caps.len()];
        let mut mandatory = Vec::new();
        let mut optional = Vec::new();
        for &j in &pending {
            let job = &self.jobs[j];
            if job.arrival > t {
                continue;
            }
            if job.deadline - t + 1 == u32::from(self.remaining[j]) {
                mandatory.push(j);
            } else {
                optional.push(j);
            }
        }
        for &j in &mandatory {
            if !self.fits(&load, j) {
                self.failed.insert((t, self.remaining.clone()));
                return Some(false);
            }
            self.add(&mut load, j);
        }
        optional.sort_by_key(|&j| (self.jobs[j].deadline, std::cmp::Reverse(self.remaining[j]), j));
        let mut sets = Vec::new();
        self.maximal_sets(&optional, 0, &mut load, &mut Vec::new(), &mut sets);

        for extra in sets {
            let running: Vec<usize> = mandatory.iter().chain(&extra).copied().collect();
            for &j in &running {
                self.remaining[j] -= 1;
                self.slots[j].push(t);
            }
            let result = self.dfs(t + 1, budget);
            if result != Some(false) {
                // success keeps the assignment in place
                return result;
            }
            for &j in &running {
                self.remaining[j] += 1;
                self.slots[j].pop();
            }
        }
        self.failed.insert((t, self.remaining.clone()));
        Some(false)
    }
}

/// Finds slot sets for all `jobs`, or proves there are none.
pub(super) fn pack(jobs: &[PackJob], caps: &[u32], budget: &mut Budget) -> Packed {
    if !volume_ok(jobs, caps) {
        return Packed::Infeasible;
    }
    let mut search = Search {
        jobs,
        caps,
        remaining: jobs.iter().map(|j| j.slots as u8).collect(),
        slots: vec![Vec::new(); jobs.len()],
        failed: HashSet::new(),
    };
    match search.dfs(1, budget) {
        Some(true) => Packed::Feasible(search.slots),
        Some(false) => Packed::Infeasible,
        None => Packed::OutOfBudget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn job(arrival: Slot, deadline: Slot, slots: u32, demand: &[u32]) -> PackJob {
        PackJob { arrival, deadline, slots, demand: demand.to_vec() }
    }

    fn budget() -> Budget {
        Budget::new(1_000_000, Instant::now() + Duration::from_secs(10))
    }

    #[test]
    fn mandatory_part() {
        let j = job(3, 8, 4, &[1]);
        assert_eq!(j.mandatory_in(3, 8), 4);
        assert_eq!(j.mandatory_in(1, 5), 1);
        assert_eq!(j.mandatory_in(6, 6), 0);
        assert_eq!(j.mandatory_in(9, 12), 0);
        assert_eq!(j.mandatory_in(5, 6), 0);
    }

    #[test]
    fn packs_interleaved_jobs() {
        let jobs = [job(1, 2, 2, &[600]), job(1, 4, 2, &[600])];
        match pack(&jobs, &[1000], &mut budget()) {
            Packed::Feasible(slots) => {
                assert_eq!(slots[0], vec![1, 2]);
                assert_eq!(slots[1], vec![3, 4]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_overload() {
        let jobs = [job(1, 2, 2, &[600]), job(1, 3, 2, &[600])];
        assert_eq!(pack(&jobs, &[1000], &mut budget()), Packed::Infeasible);
    }

    #[test]
    fn vector_conflict_that_volume_misses() {
        // per-resource volume fits, but no two jobs can share a slot on
        // resource 0 while all three need the same two slots
        let jobs = [
            job(1, 2, 1, &[600, 100]),
            job(1, 2, 1, &[600, 100]),
            job(1, 2, 1, &[600, 100]),
        ];
        assert!(!volume_ok(&jobs, &[1000, 1000]) || pack(&jobs, &[1000, 1000], &mut budget()) == Packed::Infeasible);
        assert_eq!(pack(&jobs, &[1000, 1000], &mut budget()), Packed::Infeasible);
    }

    #[test]
    fn budget_exhaustion() {
        let jobs: Vec<_> = (0..6).map(|i| job(1, 12, 4, &[300 + i])).collect();
        let mut b = Budget::new(1, Instant::now() + Duration::from_secs(10));
        assert_eq!(pack(&jobs, &[1000], &mut b), Packed::OutOfBudget);
    }
}
