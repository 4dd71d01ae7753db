//! Plain-text instance and schedule files.
//!
//! Instance layout (comma separated, one record per line):
//!
//! ```text
//! # seed=42
//! S,M,c_1,...,c_M
//! user_id,arrival,slots_required,d_1,...,d_M,B,e_1,p_1,...,e_B,p_B
//! ```
//!
//! Lines starting with `#` are comments, except `# seed=<n>` which carries the
//! instance seed. Blank lines are ignored. [`emit_instance`] writes the
//! canonical form, which [`parse_instance`] reads back exactly.
//!
//! Schedule layout: header `user_id,outcome,option,completion,payment,slots`,
//! then one row per user; `slots` is a space separated ascending list.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{Bid, DeadlineOption, Instance, Outcome, ResourceDemand, Schedule, Slot};

const SEED_DIRECTIVE: &str = "# seed=";
pub const SCHEDULE_HEADER: &str = "user_id,outcome,option,completion,payment,slots";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

pub fn emit_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SEED_DIRECTIVE}{}", inst.seed);
    let _ = write!(out, "{},{}", inst.horizon, inst.capacities.len());
    for c in &inst.capacities {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for bid in &inst.bids {
        let _ = write!(out, "{},{},{}", bid.user_id, bid.arrival, bid.slots_required);
        for d in bid.demand.amounts() {
            let _ = write!(out, ",{d}");
        }
        let _ = write!(out, ",{}", bid.options.len());
        for o in &bid.options {
            let _ = write!(out, ",{},{}", o.deadline, o.price);
        }
        out.push('\n');
    }
    out
}

struct Fields<'a> {
    line: usize,
    iter: std::str::Split<'a, char>,
}

impl<'a> Fields<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Self { line, iter: text.split(',') }
    }

    fn next<T: FromStr>(&mut self, what: &str) -> Result<T, ParseError>
    where
        T::Err: fmt::Display,
    {
        let raw = self
            .iter
            .next()
            .ok_or_else(|| ParseError::new(self.line, format!("missing field `{what}`")))?;
        raw.trim()
            .parse()
            .map_err(|e| ParseError::new(self.line, format!("field `{what}`: {e} (got {raw:?})")))
    }

    fn finish(mut self) -> Result<(), ParseError> {
        match self.iter.next() {
            None => Ok(()),
            Some(extra) => Err(ParseError::new(self.line, format!("unexpected trailing field {extra:?}"))),
        }
    }
}

/// Upper bound on list lengths read from a file, so that a corrupt count
/// cannot request a huge allocation.
const MAX_LIST: usize = 1 << 16;

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut seed = 0u64;
    let mut header: Option<(Slot, Vec<u32>)> = None;
    let mut bids = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(SEED_DIRECTIVE) {
            seed = rest
                .trim()
                .parse()
                .map_err(|e| ParseError::new(line, format!("seed: {e}")))?;
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }

        let mut f = Fields::new(line, trimmed);
        match &header {
            None => {
                let horizon: Slot = f.next("S")?;
                let m: usize = f.next("M")?;
                if m > MAX_LIST {
                    return Err(ParseError::new(line, format!("M = {m} is too large")));
                }
                let capacities = (0..m).map(|_| f.next("capacity")).collect::<Result<Vec<u32>, _>>()?;
                f.finish()?;
                header = Some((horizon, capacities));
            }
            Some((_, capacities)) => {
                let user_id: usize = f.next("user_id")?;
                let arrival: Slot = f.next("arrival")?;
                let slots_required: u32 = f.next("slots_required")?;
                let demand = (0..capacities.len())
                    .map(|_| f.next("demand"))
                    .collect::<Result<Vec<u32>, _>>()?;
                let b: usize = f.next("B")?;
                if b > MAX_LIST {
                    return Err(ParseError::new(line, format!("B = {b} is too large")));
                }
                let mut options = Vec::with_capacity(b);
                for _ in 0..b {
                    let deadline = f.next("deadline")?;
                    let price = f.next("price")?;
                    options.push(DeadlineOption { deadline, price });
                }
                f.finish()?;
                bids.push(Bid {
                    user_id,
                    arrival,
                    slots_required,
                    demand: ResourceDemand::new(demand),
                    options,
                });
            }
        }
    }

    let (horizon, capacities) = header.ok_or_else(|| ParseError::new(0, "missing `S,M,capacities` header"))?;
    Ok(Instance { horizon, capacities, bids, seed })
}

pub fn emit_schedule(sched: &Schedule) -> String {
    let mut out = String::new();
    out.push_str(SCHEDULE_HEADER);
    out.push('\n');
    for (user, (slots, outcome)) in sched.assignments.iter().zip(&sched.outcomes).enumerate() {
        let joined = slots.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
        match outcome {
            Outcome::Won { option, completion, payment } => {
                let _ = writeln!(out, "{user},won,{option},{completion},{payment},{joined}");
            }
            Outcome::Rejected => {
                let _ = writeln!(out, "{user},rejected,,,,{joined}");
            }
        }
    }
    out
}

pub fn parse_schedule(text: &str) -> Result<Schedule, ParseError> {
    let mut sched = Schedule::default();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != SCHEDULE_HEADER {
                return Err(ParseError::new(line, format!("expected header `{SCHEDULE_HEADER}`")));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() != 6 {
            return Err(ParseError::new(line, format!("expected 6 columns, found {}", cols.len())));
        }
        let user: usize = cols[0]
            .parse()
            .map_err(|e| ParseError::new(line, format!("user_id: {e}")))?;
        if user != sched.outcomes.len() {
            return Err(ParseError::new(line, format!("user {user} out of order")));
        }
        let num = |i: usize, what: &str| -> Result<u64, ParseError> {
            cols[i]
                .parse()
                .map_err(|e| ParseError::new(line, format!("{what}: {e}")))
        };
        let outcome = match cols[1] {
            "won" => Outcome::Won {
                option: usize::try_from(num(2, "option")?)
                    .map_err(|e| ParseError::new(line, format!("option: {e}")))?,
                completion: Slot::try_from(num(3, "completion")?)
                    .map_err(|e| ParseError::new(line, format!("completion: {e}")))?,
                payment: num(4, "payment")?,
            },
            "rejected" => Outcome::Rejected,
            other => return Err(ParseError::new(line, format!("unknown outcome {other:?}"))),
        };
        let slots = cols[5]
            .split_whitespace()
            .map(|s| s.parse::<Slot>().map_err(|e| ParseError::new(line, format!("slot: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        sched.assignments.push(slots);
        sched.outcomes.push(outcome);
    }
    if !saw_header {
        return Err(ParseError::new(0, "missing schedule header"));
    }
    Ok(sched)
}
