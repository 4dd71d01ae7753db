//! Soft acceptance: every arriving bid is accepted at once, service may be
//! paused (evicted from a slot) or terminated (no deadline reachable), and
//! payment is settled only on completion, against the tightest deadline
//! actually met. Terminated users are refunded in full.
//!
//! Bids reach the engine through [`ArrivalFeed`], which releases each bid at
//! its arrival slot and never earlier.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::time::Instant;

use crate::engine::{EngineConfig, EngineError, EngineState, TraceEvent, TraceKind};
use crate::metrics::RunReport;
use crate::model::{validate_instance, Bid, Instance, Price, Schedule, Slot};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SettleError {
    #[error("user {user}: completion at slot {completion} meets no deadline")]
    NoDeadlineMet { user: usize, completion: Slot },
}

/// Option and payment for a job that completed at `completion`: the
/// tightest deadline that was met sets the price.
pub fn settle_payment(bid: &Bid, completion: Slot) -> Result<(usize, Price), SettleError> {
    bid.tightest_met(completion)
        .map(|j| (j, bid.options[j].price))
        .ok_or(SettleError::NoDeadlineMet { user: bid.user_id, completion })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Accepted,
    Paused,
    Resumed,
    Terminated,
    Completed,
    Settled,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Accepted => "Accepted",
            EventKind::Paused => "Paused",
            EventKind::Resumed => "Resumed",
            EventKind::Terminated => "Terminated",
            EventKind::Completed => "Completed",
            EventKind::Settled => "Settled",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SoftAcceptEvent {
    pub slot: Slot,
    pub kind: EventKind,
    pub user_id: usize,
    /// Charged amount on `Settled`, the refund-adjusted 0 on `Terminated`.
    pub payment: Option<Price>,
}

impl SoftAcceptEvent {
    fn new(slot: Slot, kind: EventKind, user_id: usize) -> Self {
        Self { slot, kind, user_id, payment: None }
    }
}

pub const EVENT_HEADER: &str = "slot,kind,user_id,payment";

pub fn events_csv(events: &[SoftAcceptEvent]) -> String {
    let mut out = String::from(EVENT_HEADER);
    out.push('\n');
    for e in events {
        let payment = e.payment.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{payment}", e.slot, e.kind, e.user_id);
    }
    out
}

/// Releases bids slot by slot. Bids not yet released are unreachable.
pub struct ArrivalFeed {
    pending: Vec<Bid>,
}

impl ArrivalFeed {
    pub fn new(bids: impl IntoIterator<Item = Bid>) -> Self {
        let mut pending: Vec<Bid> = bids.into_iter().collect();
        // reversed so that the earliest arrival sits at the end
        pending.sort_by_key(|b| std::cmp::Reverse((b.arrival, b.user_id)));
        Self { pending }
    }

    /// Bids arriving at `t`, ascending by user id. Bids that should have
    /// arrived earlier are released too.
    pub fn release(&mut self, t: Slot) -> Vec<Bid> {
        let mut out = Vec::new();
        while self.pending.last().is_some_and(|b| b.arrival <= t) {
            out.extend(self.pending.pop());
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Running,
    Paused,
    Done,
}

/// Converts one slot's engine events into protocol events.
fn translate_slot(
    t: Slot,
    arrivals: &[usize],
    trace: &[TraceEvent],
    phases: &mut BTreeMap<usize, Phase>,
    out: &mut Vec<SoftAcceptEvent>,
) {
    for &id in arrivals {
        phases.insert(id, Phase::Running);
        out.push(SoftAcceptEvent::new(t, EventKind::Accepted, id));
    }

    let mut allocated = Vec::new();
    let mut lost = Vec::new();
    let split = trace
        .iter()
        .position(|e| e.kind == TraceKind::Complete)
        .unwrap_or(trace.len());
    for e in &trace[..split] {
        match e.kind {
            TraceKind::Allocate => allocated.push(e.user_id),
            TraceKind::Evict => {
                lost.push(e.user_id);
                if phases.get(&e.user_id) == Some(&Phase::Running) {
                    phases.insert(e.user_id, Phase::Paused);
                    out.push(SoftAcceptEvent::new(t, EventKind::Paused, e.user_id));
                }
            }
            TraceKind::Reject => {
                lost.push(e.user_id);
                phases.insert(e.user_id, Phase::Done);
                out.push(SoftAcceptEvent {
                    payment: Some(0),
                    ..SoftAcceptEvent::new(t, EventKind::Terminated, e.user_id)
                });
            }
            TraceKind::Complete => unreachable!("split before completions"),
        }
    }

    allocated.sort_unstable();
    for id in allocated {
        if !lost.contains(&id) && phases.get(&id) == Some(&Phase::Paused) {
            phases.insert(id, Phase::Running);
            out.push(SoftAcceptEvent::new(t, EventKind::Resumed, id));
        }
    }

    for e in &trace[split..] {
        match e.kind {
            TraceKind::Complete => {
                phases.insert(e.user_id, Phase::Done);
                out.push(SoftAcceptEvent::new(t, EventKind::Completed, e.user_id));
                out.push(SoftAcceptEvent {
                    payment: e.payment,
                    ..SoftAcceptEvent::new(t, EventKind::Settled, e.user_id)
                });
            }
            TraceKind::Reject => {
                phases.insert(e.user_id, Phase::Done);
                out.push(SoftAcceptEvent {
                    payment: Some(0),
                    ..SoftAcceptEvent::new(t, EventKind::Terminated, e.user_id)
                });
            }
            TraceKind::Allocate | TraceKind::Evict => {}
        }
    }
}

/// Runs the soft-acceptance protocol over the instance's horizon.
pub fn run_online(
    inst: &Instance,
    cfg: &EngineConfig,
) -> Result<(Schedule, Vec<SoftAcceptEvent>, RunReport), EngineError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(EngineError::InvalidInstance(violations));
    }
    let started = Instant::now();
    let mut feed = ArrivalFeed::new(inst.bids.iter().cloned());
    let mut state = EngineState::for_instance(inst);
    let mut phases = BTreeMap::new();
    let mut events = Vec::new();
    while !state.is_done() {
        let t = state.t;
        let arrivals = feed.release(t);
        let ids: Vec<usize> = arrivals.iter().map(|b| b.user_id).collect();
        let before = state.trace.len();
        state.advance(arrivals, cfg);
        translate_slot(t, &ids, &state.trace[before..], &mut phases, &mut events);
    }
    let sched = state.schedule(inst.num_users());
    let report = RunReport::from_schedule(inst, &sched, state.move_count, started.elapsed());
    Ok((sched, events, report))
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("user {user_id}: {kind} at slot {slot} breaks the event grammar")]
pub struct GrammarError {
    pub user_id: usize,
    pub slot: Slot,
    pub kind: EventKind,
}

/// Checks that each user's events follow
/// `Accepted (Paused Resumed?)* (Terminated | Completed Settled)`, with
/// slots non-decreasing and payment only on `Settled` (0 on `Terminated`).
pub fn check_event_grammar(events: &[SoftAcceptEvent]) -> Result<(), GrammarError> {
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum S {
        Start,
        Running,
        Paused,
        Completed,
        Finished,
    }
    let mut state: BTreeMap<usize, (S, Slot)> = BTreeMap::new();
    for e in events {
        let (s, last) = state.get(&e.user_id).copied().unwrap_or((S::Start, 0));
        let err = GrammarError { user_id: e.user_id, slot: e.slot, kind: e.kind };
        if e.slot < last {
            return Err(err);
        }
        let payment_ok = match e.kind {
            EventKind::Settled => e.payment.is_some(),
            EventKind::Terminated => e.payment.is_none_or(|p| p == 0),
            _ => e.payment.is_none(),
        };
        if !payment_ok {
            return Err(err);
        }
        let next = match (s, e.kind) {
            (S::Start, EventKind::Accepted) => S::Running,
            (S::Running, EventKind::Paused) => S::Paused,
            (S::Paused, EventKind::Resumed) => S::Running,
            (S::Paused, EventKind::Paused) => S::Paused,
            (S::Running | S::Paused, EventKind::Terminated) => S::Finished,
            (S::Running | S::Paused, EventKind::Completed) => S::Completed,
            (S::Completed, EventKind::Settled) => S::Finished,
            _ => return Err(err),
        };
        state.insert(e.user_id, (next, e.slot));
    }
    match state.iter().find(|(_, (s, _))| *s != S::Finished) {
        Some((&user_id, &(_, slot))) => Err(GrammarError {
            user_id,
            slot,
            kind: EventKind::Accepted,
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_offline, Strategy};
    use crate::model::fixtures::{bid, instance_x};

    fn ev(slot: Slot, kind: EventKind, user_id: usize, payment: Option<Price>) -> SoftAcceptEvent {
        SoftAcceptEvent { slot, kind, user_id, payment }
    }

    #[test]
    fn settle_tightest_met() {
        let b = bid(0, 1, 2, &[100], &[(2, 10), (4, 6)]);
        assert_eq!(settle_payment(&b, 2), Ok((0, 10)));
        assert_eq!(settle_payment(&b, 3), Ok((1, 6)));
        let b = bid(4, 1, 2, &[100], &[(2, 10)]);
        assert_eq!(
            settle_payment(&b, 3),
            Err(SettleError::NoDeadlineMet { user: 4, completion: 3 })
        );
    }

    #[test]
    fn instance_x_event_log() {
        let inst = instance_x();
        let cfg = EngineConfig::new(Strategy::Trwaem);
        let (sched, events, report) = run_online(&inst, &cfg).unwrap();
        use EventKind::*;
        assert_eq!(
            events,
            vec![
                ev(1, Accepted, 0, None),
                ev(1, Accepted, 1, None),
                ev(1, Paused, 1, None),
                ev(2, Completed, 0, None),
                ev(2, Settled, 0, Some(10)),
                ev(3, Resumed, 1, None),
                ev(4, Completed, 1, None),
                ev(4, Settled, 1, Some(5)),
            ]
        );
        assert_eq!(report.welfare, 15);
        assert_eq!(sched, run_offline(&inst, &cfg).unwrap().0);
        check_event_grammar(&events).unwrap();
    }

    #[test]
    fn no_bids_no_events() {
        let inst = Instance::new(4, 2, vec![]);
        let (_, events, report) = run_online(&inst, &EngineConfig::new(Strategy::Truem)).unwrap();
        assert!(events.is_empty());
        assert_eq!(report.welfare, 0);
    }

    #[test]
    fn uncontended_bid_settles_best_option() {
        let inst = Instance::new(6, 1, vec![bid(0, 2, 2, &[300], &[(3, 9), (6, 2)])]);
        let (_, events, _) = run_online(&inst, &EngineConfig::new(Strategy::Truem)).unwrap();
        use EventKind::*;
        assert_eq!(
            events,
            vec![ev(2, Accepted, 0, None), ev(3, Completed, 0, None), ev(3, Settled, 0, Some(9))]
        );
    }

    #[test]
    fn termination_refunds() {
        let inst = Instance::new(
            3,
            1,
            vec![bid(0, 1, 2, &[800], &[(2, 9)]), bid(1, 1, 2, &[800], &[(2, 3)])],
        );
        let (_, events, report) = run_online(&inst, &EngineConfig::new(Strategy::Trwaem)).unwrap();
        use EventKind::*;
        assert!(events.contains(&ev(1, Paused, 1, None)));
        assert!(events.contains(&ev(1, Terminated, 1, Some(0))));
        assert_eq!(report.welfare, 9);
        check_event_grammar(&events).unwrap();
    }

    #[test]
    fn grammar_rejects_bad_sequences() {
        use EventKind::*;
        assert!(check_event_grammar(&[ev(1, Paused, 0, None)]).is_err());
        assert!(check_event_grammar(&[ev(1, Accepted, 0, None)]).is_err());
        assert!(check_event_grammar(&[
            ev(1, Accepted, 0, None),
            ev(2, Completed, 0, None),
        ])
        .is_err());
        assert!(check_event_grammar(&[
            ev(1, Accepted, 0, None),
            ev(1, Terminated, 0, Some(4)),
        ])
        .is_err());
        assert!(check_event_grammar(&[
            ev(2, Accepted, 0, None),
            ev(1, Terminated, 0, None),
        ])
        .is_err());
        assert!(check_event_grammar(&[
            ev(1, Accepted, 0, None),
            ev(1, Paused, 0, None),
            ev(2, Resumed, 0, None),
            ev(3, Completed, 0, None),
            ev(3, Settled, 0, Some(1)),
        ])
        .is_ok());
    }

    #[test]
    fn feed_releases_in_arrival_order() {
        let mut feed = ArrivalFeed::new(vec![
            bid(2, 3, 1, &[1], &[(3, 1)]),
            bid(0, 1, 1, &[1], &[(1, 1)]),
            bid(1, 3, 1, &[1], &[(3, 1)]),
        ]);
        assert_eq!(feed.release(1).iter().map(|b| b.user_id).collect::<Vec<_>>(), vec![0]);
        assert!(feed.release(2).is_empty());
        assert_eq!(feed.release(3).iter().map(|b| b.user_id).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn events_csv_format() {
        let csv = events_csv(&[ev(1, EventKind::Accepted, 0, None), ev(2, EventKind::Settled, 0, Some(7))]);
        assert_eq!(csv, "slot,kind,user_id,payment\n1,Accepted,0,\n2,Settled,0,7\n");
    }
}
