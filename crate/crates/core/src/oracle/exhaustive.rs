//! Brute-force reference solver.
//!
//! Walks the slots in order and, at every slot, tries every subset of the
//! users whose window covers the slot and that fits the capacities. A user
//! that completes its last slot at `f` earns the best price among the
//! options with deadline `>= f`. Results are memoized on
//! `(slot, progress of every user)`; nothing is pruned.
//!
//! Intended for tiny instances (up to 5 users, 12 slots).

use std::collections::HashMap;
use std::time::Instant;

use super::{OracleResult, OracleStatus};
use crate::model::{Instance, Outcome, Price, Schedule, Slot};

struct Table<'a> {
    inst: &'a Instance,
    /// Bids by user id.
    bids: Vec<&'a crate::model::Bid>,
    memo: HashMap<(Slot, Vec<u8>), (Price, u64)>,
    nodes: u64,
}

impl Table<'_> {
    fn eligible(&self, t: Slot, progress: &[u8]) -> Vec<usize> {
        self.bids
            .iter()
            .enumerate()
            .filter(|(i, b)| {
                b.arrival <= t && t <= b.latest_deadline() && u32::from(progress[*i]) < b.slots_required
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn fits(&self, members: &[usize]) -> bool {
        (0..self.inst.num_resources()).all(|m| {
            let used: u64 = members
                .iter()
                .map(|&i| u64::from(self.bids[i].demand.amounts()[m]))
                .sum();
            used <= u64::from(self.inst.capacities[m])
        })
    }

    /// Best price for a job finishing at `f`.
    fn completion_gain(&self, user: usize, f: Slot) -> Price {
        self.bids[user]
            .options
            .iter()
            .filter(|o| o.deadline >= f)
            .map(|o| o.price)
            .max()
            .unwrap_or(0)
    }

    fn key(&self, t: Slot, progress: &[u8]) -> Vec<u8> {
        // progress of users whose window closed no longer matters
        progress
            .iter()
            .zip(&self.bids)
            .map(|(&p, b)| if t > b.latest_deadline() { 0 } else { p })
            .collect()
    }

    /// Best welfare from slot `t` on, and the subset mask chosen at `t`.
    fn value(&mut self, t: Slot, progress: &mut Vec<u8>) -> (Price, u64) {
        if t > self.inst.horizon {
            return (0, 0);
        }
        let key = (t, self.key(t, progress));
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        self.nodes += 1;
        let eligible = self.eligible(t, progress);
        let mut best = (0, 0);
        let mut first = true;
        for mask in 0u64..(1u64 << eligible.len()) {
            let members: Vec<usize> = eligible
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &i)| i)
                .collect();
            if !self.fits(&members) {
                continue;
            }
            let mut gain = 0;
            for &i in &members {
                progress[i] += 1;
                if u32::from(progress[i]) == self.bids[i].slots_required {
                    gain += self.completion_gain(i, t);
                }
            }
            let (rest, _) = self.value(t + 1, progress);
            for &i in &members {
                progress[i] -= 1;
            }
            let user_mask = members.iter().fold(0u64, |acc, &i| acc | (1 << i));
            if first || gain + rest > best.0 {
                best = (gain + rest, user_mask);
                first = false;
            }
        }
        self.memo.insert(key, best);
        best
    }
}

/// Exact optimum by exhaustive search. The caller keeps the instance tiny.
pub fn solve_exhaustive(inst: &Instance) -> OracleResult {
    let started = Instant::now();
    let n = inst.num_users();
    assert!(n <= 63, "exhaustive search is limited to 63 users");
    let mut table = Table {
        inst,
        bids: inst.bids_by_user(),
        memo: HashMap::new(),
        nodes: 0,
    };
    let mut progress = vec![0u8; n];
    let (optimum, _) = table.value(1, &mut progress);

    // replay the chosen subsets
    let mut slots: Vec<Vec<Slot>> = vec![Vec::new(); n];
    for t in 1..=inst.horizon {
        let (_, mask) = table.value(t, &mut progress);
        for (i, held) in slots.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                progress[i] += 1;
                held.push(t);
            }
        }
    }

    let mut witness = Schedule::all_rejected(n);
    for (i, held) in slots.into_iter().enumerate() {
        let bid = table.bids[i];
        if held.len() != bid.slots_required as usize {
            continue;
        }
        let f = *held.last().expect("at least one slot");
        let option = bid
            .options
            .iter()
            .enumerate()
            .filter(|(_, o)| o.deadline >= f)
            .max_by(|(ja, a), (jb, b)| a.price.cmp(&b.price).then(jb.cmp(ja)))
            .map(|(j, _)| j)
            .expect("completion within the latest deadline");
        witness.assignments[i] = held;
        witness.outcomes[i] = Outcome::Won {
            option,
            completion: f,
            payment: bid.options[option].price,
        };
    }

    OracleResult {
        optimum_welfare: optimum,
        witness,
        nodes_explored: table.nodes,
        elapsed: started.elapsed(),
        status: OracleStatus::Optimal,
        instance_digest: inst.digest(),
    }
}
