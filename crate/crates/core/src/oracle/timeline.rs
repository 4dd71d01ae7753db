//! Slot-by-slot dynamic program for one group of interacting users.
//!
//! The state at slot `t` is the progress of the users whose window contains
//! `t`. Users that can no longer finish are folded into "done". From each
//! state only maximal sets of runnable users are tried: if a job fits into
//! a slot it does not use, moving its last slot forward (or adding the slot,
//! if it never completes) keeps the schedule feasible and never lowers its
//! payment, so some optimum runs a maximal set in every slot.
//!
//! Each visit carries a threshold `need`: a state only has to report its
//! exact value when that value reaches `need`, otherwise an upper bound
//! below `need` is enough. The memo keeps exact values and proven upper
//! bounds apart. The root threshold is the welfare of a greedy pass.
//!
//! Cost grows with the number of simultaneously open windows, not with the
//! number of users or options.

use std::collections::HashMap;

use super::packing::{Budget, PackJob};
use crate::model::{Price, Slot};

/// One user as seen by the program.
#[derive(Clone, Debug)]
pub(super) struct Job {
    pub arrival: Slot,
    pub latest: Slot,
    pub slots: u32,
    pub demand: Vec<u32>,
    /// `(deadline, price)` pairs; the gain of finishing at `f` is the best
    /// price with deadline `>= f`.
    pub options: Vec<(Slot, Price)>,
}

impl Job {
    fn gain(&self, finish: Slot) -> Price {
        self.options
            .iter()
            .filter(|o| o.0 >= finish)
            .map(|o| o.1)
            .max()
            .unwrap_or(0)
    }

    fn volume(&self, slots: u32) -> u64 {
        u64::from(slots) * self.demand.iter().map(|&d| u64::from(d)).sum::<u64>().max(1)
    }
}

/// Largest product of `(s_i + 1)` over the users open in any one slot; a
/// cheap ceiling on the states per slot.
pub(super) fn state_estimate(jobs: &[Job]) -> f64 {
    let lo = jobs.iter().map(|j| j.arrival).min().unwrap_or(1);
    let hi = jobs.iter().map(|j| j.latest).max().unwrap_or(lo);
    (lo..=hi)
        .map(|t| {
            jobs.iter()
                .filter(|j| j.arrival <= t && t <= j.latest)
                .map(|j| f64::from(j.slots + 1))
                .product::<f64>()
        })
        .fold(1.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Found {
    Exact(Price),
    /// The value is at most this, which is below the threshold asked for.
    AtMost(Price),
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    value: Price,
    exact: bool,
    /// Chosen subset as a mask over the open users of the slot.
    mask: u64,
}

struct Program<'a> {
    jobs: &'a [Job],
    caps: &'a [u32],
    lo: Slot,
    hi: Slot,
    /// Open users per slot offset, by job index.
    open: Vec<Vec<usize>>,
    memo: Vec<HashMap<Vec<u8>, Entry>>,
    /// Distinct window ends, ascending.
    ends: Vec<Slot>,
    /// See [`Program::tail_bounds`].
    tail: Vec<Price>,
}

/// Head intervals tried per bound.
const TAIL_SPLITS: usize = 6;

impl Program<'_> {
    /// Remaining work of user `i` at `t`, 0 when done or hopeless.
    fn remaining(&self, i: usize, t: Slot, progress: &[u8]) -> u32 {
        let job = &self.jobs[i];
        let left = job.slots - u32::from(progress[i]);
        if left > 0 && t + left - 1 > job.latest {
            0
        } else {
            left
        }
    }

    /// Canonical key for the open users of `t` given full progress.
    fn key(&self, t: Slot, progress: &[u8]) -> Vec<u8> {
        self.open[(t - self.lo) as usize]
            .iter()
            .map(|&i| (self.jobs[i].slots - self.remaining(i, t, progress)) as u8)
            .collect()
    }

    fn fits(&self, load: &[u64], i: usize) -> bool {
        load.iter()
            .zip(&self.jobs[i].demand)
            .zip(self.caps)
            .all(|((&l, &d), &c)| l + u64::from(d) <= u64::from(c))
    }

    fn maximal_sets(&self, runnable: &[usize], k: usize, load: &mut Vec<u64>, mask: u64, out: &mut Vec<u64>) {
        if k == runnable.len() {
            let maximal = runnable
                .iter()
                .enumerate()
                .all(|(b, &i)| mask & (1 << b) != 0 || !self.fits(load, i));
            if maximal {
                out.push(mask);
            }
            return;
        }
        let i = runnable[k];
        if self.fits(load, i) {
            for (l, &d) in load.iter_mut().zip(&self.jobs[i].demand) {
                *l += u64::from(d);
            }
            self.maximal_sets(runnable, k + 1, load, mask | (1 << k), out);
            for (l, &d) in load.iter_mut().zip(&self.jobs[i].demand) {
                *l -= u64::from(d);
            }
        }
        self.maximal_sets(runnable, k + 1, load, mask, out);
    }

    /// Value bound for the users `(gain, window start, window end, work)`
    /// inside `[lo, hi]`: the gains of users with no mandatory work there
    /// plus, per resource, a fractional knapsack of the others into the
    /// capacity of the interval. The smallest over resources.
    fn knapsack(&self, lo: Slot, hi: Slot, users: &[(Price, Slot, Slot, u32, usize)]) -> Price {
        let len = u64::from(hi - lo + 1);
        let mut free: Price = 0;
        let mut items: Vec<(Price, u32, usize)> = Vec::with_capacity(users.len());
        for &(gain, start, end, work, i) in users {
            let inside = PackJob {
                arrival: start,
                deadline: end,
                slots: work,
                demand: Vec::new(),
            }
            .mandatory_in(lo, hi);
            if inside == 0 {
                free += gain;
            } else {
                items.push((gain, inside, i));
            }
        }
        let mut bound = Price::MAX;
        let mut sorted: Vec<(Price, u64)> = Vec::with_capacity(items.len());
        for m in 0..self.caps.len() {
            let mut cap = u64::from(self.caps[m]) * len;
            sorted.clear();
            sorted.extend(
                items
                    .iter()
                    .map(|&(g, inside, i)| (g, u64::from(inside) * u64::from(self.jobs[i].demand[m]))),
            );
            sorted.sort_by(|a, b| (u128::from(b.0) * u128::from(a.1)).cmp(&(u128::from(a.0) * u128::from(b.1))));
            let mut value = free;
            for &(g, w) in &sorted {
                if w <= cap {
                    cap -= w;
                    value += g;
                } else {
                    value += (u128::from(g) * u128::from(cap) / u128::from(w.max(1))) as Price;
                    break;
                }
            }
            bound = bound.min(value);
        }
        bound
    }

    /// `tail[k]`: bound on the welfare of the users whose window ends at or
    /// after `ends[k]`, assuming none of them has started, over chains of
    /// disjoint intervals. Each user is charged to the interval holding its
    /// window end, which keeps the chain additive.
    fn tail_bounds(&self) -> Vec<Price> {
        let e = self.ends.len();
        let mut tail = vec![0; e + 1];
        for k in (0..e).rev() {
            let lo = if k == 0 { self.lo } else { self.ends[k - 1] + 1 };
            let mut users: Vec<(Price, Slot, Slot, u32, usize)> = Vec::new();
            let mut best = Price::MAX;
            for j in k..e {
                users.extend(
                    self.jobs
                        .iter()
                        .enumerate()
                        .filter(|(_, job)| job.latest == self.ends[j])
                        .map(|(i, job)| (job.gain(job.arrival + job.slots - 1), job.arrival, job.latest, job.slots, i)),
                );
                best = best.min(self.knapsack(lo, self.ends[j], &users) + tail[j + 1]);
            }
            tail[k] = best;
        }
        tail
    }

    /// Upper bound on the welfare still to be earned from slot `t` on.
    fn upper_bound(&self, t: Slot, progress: &[u8]) -> Price {
        // users already in their window that can still finish
        let mut reach = t;
        let mut users: Vec<(Price, Slot, Slot, u32, usize)> = Vec::new();
        for &i in &self.open[(t - self.lo) as usize] {
            let left = self.remaining(i, t, progress);
            if left > 0 {
                let job = &self.jobs[i];
                reach = reach.max(job.latest);
                users.push((job.gain(t + left - 1), t, job.latest, left, i));
            }
        }
        let first = self.ends.partition_point(|&e| e < reach);
        let mut best = Price::MAX;
        let mut added = self.ends.partition_point(|&e| e < t);
        // later windows ending by `ends[j]` join the head interval
        let mut head = users;
        for j in first..self.ends.len().min(first + TAIL_SPLITS) {
            while added <= j {
                head.extend(
                    self.jobs
                        .iter()
                        .enumerate()
                        .filter(|(_, job)| job.latest == self.ends[added] && job.arrival > t)
                        .map(|(i, job)| (job.gain(job.arrival + job.slots - 1), job.arrival, job.latest, job.slots, i)),
                );
                added += 1;
            }
            best = best.min(self.knapsack(t, self.ends[j], &head) + self.tail[j + 1]);
        }
        if first >= self.ends.len() {
            best = head.iter().map(|u| u.0).sum();
        }
        best
    }

    /// Runnable users at `t`, most pressing first: those that must run now
    /// to finish, then by value per unit of remaining volume.
    fn runnable(&self, t: Slot, progress: &[u8]) -> Vec<usize> {
        let mut list: Vec<(bool, Price, u64, usize)> = self.open[(t - self.lo) as usize]
            .iter()
            .filter_map(|&i| {
                let left = self.remaining(i, t, progress);
                (left > 0).then(|| {
                    let job = &self.jobs[i];
                    let tight = t + left - 1 == job.latest;
                    (tight, job.gain(t + left - 1), job.volume(left), i)
                })
            })
            .collect();
        list.sort_by(|a, b| {
            b.0.cmp(&a.0)
                .then((u128::from(b.1) * u128::from(a.2)).cmp(&(u128::from(a.1) * u128::from(b.2))))
                .then(a.3.cmp(&b.3))
        });
        list.into_iter().map(|x| x.3).collect()
    }

    /// Applies `set` (over `runnable`) at `t`; returns the gain and the mask
    /// over the open users.
    fn apply(&self, t: Slot, runnable: &[usize], set: u64, progress: &mut [u8]) -> (Price, u64) {
        let open = &self.open[(t - self.lo) as usize];
        let mut gain = 0;
        let mut mask = 0u64;
        for (b, &i) in runnable.iter().enumerate() {
            if set & (1 << b) != 0 {
                progress[i] += 1;
                if u32::from(progress[i]) == self.jobs[i].slots {
                    gain += self.jobs[i].gain(t);
                }
                mask |= 1 << open.iter().position(|&x| x == i).expect("runnable users are open");
            }
        }
        (gain, mask)
    }

    fn revert(runnable: &[usize], set: u64, progress: &mut [u8]) {
        for (b, &i) in runnable.iter().enumerate() {
            if set & (1 << b) != 0 {
                progress[i] -= 1;
            }
        }
    }

    /// Welfare of always running the first maximal set in priority order.
    fn greedy(&self) -> Price {
        let mut progress = vec![0u8; self.jobs.len()];
        let mut total = 0;
        for t in self.lo..=self.hi {
            let runnable = self.runnable(t, &progress);
            let mut load = vec![0u64; self.caps.len()];
            let mut set = 0u64;
            for (b, &i) in runnable.iter().enumerate() {
                if self.fits(&load, i) {
                    for (l, &d) in load.iter_mut().zip(&self.jobs[i].demand) {
                        *l += u64::from(d);
                    }
                    set |= 1 << b;
                }
            }
            total += self.apply(t, &runnable, set, &mut progress).0;
        }
        total
    }

    /// Value from slot `t` on, exact if it reaches `need`. `None` when the
    /// budget runs out.
    fn value(&mut self, t: Slot, progress: &mut [u8], need: Price, budget: &mut Budget) -> Option<Found> {
        if t > self.hi {
            return Some(Found::Exact(0));
        }
        let off = (t - self.lo) as usize;
        let key = self.key(t, progress);
        if let Some(e) = self.memo[off].get(&key) {
            if e.exact {
                return Some(Found::Exact(e.value));
            }
            if e.value < need {
                return Some(Found::AtMost(e.value));
            }
        }
        if !budget.tick() {
            return None;
        }
        let ub = self.upper_bound(t, progress);
        if ub < need {
            self.memo[off].insert(key, Entry { value: ub, exact: false, mask: 0 });
            return Some(Found::AtMost(ub));
        }

        let runnable = self.runnable(t, progress);
        let mut sets = Vec::new();
        self.maximal_sets(&runnable, 0, &mut vec![0; self.caps.len()], 0, &mut sets);

        let mut best: Option<(Price, u64)> = None;
        let mut ceiling: Price = 0;
        for set in sets {
            let target = best.map_or(need, |(v, _)| need.max(v + 1));
            let (gain, mask) = self.apply(t, &runnable, set, progress);
            let child = self.value(t + 1, progress, target.saturating_sub(gain), budget);
            Self::revert(&runnable, set, progress);
            match child? {
                Found::Exact(v) => {
                    if best.is_none_or(|(b, _)| gain + v > b) {
                        best = Some((gain + v, mask));
                    }
                }
                Found::AtMost(v) => ceiling = ceiling.max(gain + v),
            }
        }
        let entry = match best {
            Some((v, mask)) if v >= need => Entry { value: v, exact: true, mask },
            _ => Entry {
                value: best.map_or(ceiling, |(v, _)| v.max(ceiling)),
                exact: false,
                mask: 0,
            },
        };
        self.memo[off].insert(key, entry);
        Some(if entry.exact { Found::Exact(entry.value) } else { Found::AtMost(entry.value) })
    }
}

/// Optimal welfare of `jobs` and the slots each job runs in (empty for
/// users that do not complete). `floor` must be the welfare of some
/// feasible schedule. `None` if the budget ran out.
pub(super) fn solve(jobs: &[Job], caps: &[u32], floor: Price, budget: &mut Budget) -> Option<(Price, Vec<Vec<Slot>>)> {
    if jobs.is_empty() {
        return Some((0, Vec::new()));
    }
    let lo = jobs.iter().map(|j| j.arrival).min().expect("non-empty");
    let hi = jobs.iter().map(|j| j.latest).max().expect("non-empty");
    let open: Vec<Vec<usize>> = (lo..=hi)
        .map(|t| {
            (0..jobs.len())
                .filter(|&i| jobs[i].arrival <= t && t <= jobs[i].latest)
                .collect()
        })
        .collect();
    if open.iter().any(|o| o.len() > 64) {
        return None;
    }
    let mut ends: Vec<Slot> = jobs.iter().map(|j| j.latest).collect();
    ends.sort_unstable();
    ends.dedup();
    let mut program = Program {
        jobs,
        caps,
        lo,
        hi,
        memo: vec![HashMap::new(); open.len()],
        open,
        ends,
        tail: Vec::new(),
    };
    program.tail = program.tail_bounds();
    let mut progress = vec![0u8; jobs.len()];
    let floor = program.greedy().max(floor);
    let optimum = match program.value(lo, &mut progress, floor, budget)? {
        Found::Exact(v) => v,
        Found::AtMost(_) => unreachable!("the floor is the welfare of a feasible schedule"),
    };

    // replay the stored choices
    let mut held: Vec<Vec<Slot>> = vec![Vec::new(); jobs.len()];
    for t in lo..=hi {
        let off = (t - lo) as usize;
        let key = program.key(t, &progress);
        let entry = program.memo[off].get(&key).copied();
        let mask = match entry {
            Some(e) if e.exact => e.mask,
            // states past the last completion are never stored
            _ => 0,
        };
        for (b, &i) in program.open[off].iter().enumerate() {
            if mask & (1 << b) != 0 {
                progress[i] += 1;
                held[i].push(t);
            }
        }
    }
    for (i, slots) in held.iter_mut().enumerate() {
        if slots.len() != jobs[i].slots as usize {
            slots.clear();
        }
    }
    Some((optimum, held))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::{Duration, Instant};

    fn budget() -> Budget {
        Budget::new(1_000_000, Instant::now() + Duration::from_secs(10))
    }

    fn job(arrival: Slot, slots: u32, demand: &[u32], options: &[(Slot, Price)]) -> Job {
        Job {
            arrival,
            latest: options.iter().map(|o| o.0).max().unwrap(),
            slots,
            demand: demand.to_vec(),
            options: options.to_vec(),
        }
    }

    #[test]
    fn instance_x() {
        let jobs = [job(1, 2, &[600], &[(2, 10), (4, 6)]), job(1, 2, &[600], &[(3, 8), (5, 5)])];
        let (value, slots) = solve(&jobs, &[1000], 0, &mut budget()).unwrap();
        assert_eq!(value, 15);
        assert_eq!(slots[0], vec![1, 2]);
        assert_eq!(slots[1], vec![3, 4]);
    }

    #[test]
    fn unfinished_users_hold_no_slots() {
        let jobs = [job(1, 2, &[600], &[(2, 10)]), job(1, 2, &[600], &[(2, 3)])];
        let (value, slots) = solve(&jobs, &[1000], 0, &mut budget()).unwrap();
        assert_eq!(value, 10);
        assert!(slots[1].is_empty());
    }

    #[test]
    fn estimate_counts_overlap() {
        let jobs = [job(1, 2, &[1], &[(3, 1)]), job(2, 3, &[1], &[(5, 1)]), job(9, 1, &[1], &[(9, 1)])];
        assert_eq!(state_estimate(&jobs), 12.0);
    }
}
