//! Seeded synthetic instances and cluster-trace ingestion.
//!
//! Every draw is an integer from a ChaCha stream, so generated instances are
//! byte-identical across platforms. Option `j` of a bid has deadline
//! `a + s - 1 + slack[j]` (clamped to the horizon; options that collapse
//! onto an earlier deadline are dropped) and price
//! `round(base * decay^j)` with `decay` in per-mille.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Bid, DeadlineOption, Instance, Price, ResourceDemand, Slot, FULL_CAPACITY};

/// Seconds per slot when reading traces.
pub const SLOT_SECONDS: f64 = 300.0;
/// Longest job, in slots, accepted from a trace.
pub const MAX_TRACE_SLOTS: u32 = 12;

/// What the top price of a bid is proportional to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriceBasis {
    /// `scale * s * sum(r) / 1000`: price per slot per full unit of resource.
    Footprint,
    /// `scale`, independent of the job's size.
    Flat,
}

/// How a bid's top price is drawn: the basis times a factor drawn uniformly
/// from `factor_permille` (per-mille), rounded, at least 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceModel {
    pub basis: PriceBasis,
    pub scale: u64,
    pub factor_permille: (u32, u32),
    pub decay_permille: u32,
}

impl Default for PriceModel {
    fn default() -> Self {
        Self {
            basis: PriceBasis::Footprint,
            scale: 100,
            factor_permille: (500, 1500),
            decay_permille: 800,
        }
    }
}

impl PriceModel {
    fn base(&self, slots: u32, demand_total: u64, factor: u32) -> Price {
        let (num, den) = match self.basis {
            PriceBasis::Footprint => (
                u128::from(self.scale) * u128::from(slots) * u128::from(demand_total) * u128::from(factor),
                1_000_000u128,
            ),
            PriceBasis::Flat => (u128::from(self.scale) * u128::from(factor), 1000u128),
        };
        (((num + den / 2) / den) as Price).max(1)
    }

    /// Price of option `j` (0-based): `round(base * (decay/1000)^j)`.
    pub fn option_price(&self, base: Price, j: usize) -> Price {
        let mut num = u128::from(base);
        let mut den = 1u128;
        for _ in 0..j {
            num *= u128::from(self.decay_permille);
            den *= 1000;
        }
        ((num + den / 2) / den) as Price
    }

    fn check(&self) -> Result<(), WorkloadError> {
        let (lo, hi) = self.factor_permille;
        if lo > hi {
            return Err(WorkloadError::InvalidSpec("price factor range is empty".into()));
        }
        if self.decay_permille == 0 || self.decay_permille > 1000 {
            return Err(WorkloadError::InvalidSpec("decay must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub num_users: usize,
    pub num_resources: usize,
    pub num_options: usize,
    pub horizon: Slot,
    /// Inclusive range of `s_i`.
    pub slots_required: (u32, u32),
    /// Inclusive per-resource demand range, milli-units.
    pub demand: (u32, u32),
    pub price: PriceModel,
    /// Deadline slack of option `j`; strictly increasing, at least
    /// `num_options` entries.
    pub slack: Vec<u32>,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            num_users: 10,
            num_resources: 2,
            num_options: 1,
            horizon: 42,
            slots_required: (1, 12),
            demand: (100, 600),
            price: PriceModel {
                basis: PriceBasis::Flat,
                factor_permille: (100, 1900),
                ..PriceModel::default()
            },
            slack: linear_slack(9, 1, 1),
            seed: 0,
        }
    }
}

/// `first, first + step, ...` with `count` entries.
pub fn linear_slack(count: usize, first: u32, step: u32) -> Vec<u32> {
    (0..count as u32).map(|j| first + step * j).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum WorkloadError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("horizon {horizon} cannot host a job of {slots} slots")]
    InfeasibleSpec { horizon: Slot, slots: u32 },
    #[error("trace line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("trace has no rows")]
    EmptyTrace,
    #[error("reading trace: {0}")]
    Io(#[from] std::io::Error),
}

impl GeneratorSpec {
    pub fn check(&self) -> Result<(), WorkloadError> {
        let bad = |m: &str| Err(WorkloadError::InvalidSpec(m.to_string()));
        if self.num_resources == 0 {
            return bad("at least one resource type is required");
        }
        if self.num_options == 0 {
            return bad("at least one deadline option is required");
        }
        let (s_lo, s_hi) = self.slots_required;
        if s_lo == 0 || s_lo > s_hi {
            return bad("slots_required range must be non-empty and start at 1 or more");
        }
        if s_hi > u32::from(u8::MAX) {
            return bad("slots_required is limited to 255");
        }
        let (d_lo, d_hi) = self.demand;
        if d_lo == 0 || d_lo > d_hi || d_hi > FULL_CAPACITY {
            return bad("demand range must be non-empty within 1..=1000");
        }
        if self.slack.len() < self.num_options {
            return bad("slack schedule is shorter than num_options");
        }
        if self.slack.windows(2).any(|w| w[1] <= w[0]) {
            return bad("slack schedule must be strictly increasing");
        }
        self.price.check()?;
        if self.horizon <= s_hi {
            return Err(WorkloadError::InfeasibleSpec { horizon: self.horizon, slots: s_hi });
        }
        Ok(())
    }
}

fn options_for(
    arrival: Slot,
    slots: u32,
    base: Price,
    horizon: Slot,
    slack: &[u32],
    price: &PriceModel,
) -> Vec<DeadlineOption> {
    let mut options: Vec<DeadlineOption> = Vec::with_capacity(slack.len());
    for (j, &extra) in slack.iter().enumerate() {
        let deadline = (arrival + slots - 1 + extra).min(horizon);
        if options.last().is_some_and(|o| o.deadline >= deadline) {
            break;
        }
        options.push(DeadlineOption::new(deadline, price.option_price(base, j)));
    }
    options
}

/// Draws an instance. Arrivals are uniform over `[1, S - max s]`; users
/// arriving in the same slot are ordered randomly, and user ids follow the
/// resulting arrival order.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance, WorkloadError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let last_arrival = spec.horizon - spec.slots_required.1;
    let slack = &spec.slack[..spec.num_options];

    let mut drafts = Vec::with_capacity(spec.num_users);
    for _ in 0..spec.num_users {
        let arrival: Slot = rng.gen_range(1..=last_arrival);
        let slots: u32 = rng.gen_range(spec.slots_required.0..=spec.slots_required.1);
        let demand: Vec<u32> = (0..spec.num_resources)
            .map(|_| rng.gen_range(spec.demand.0..=spec.demand.1))
            .collect();
        let factor: u32 = rng.gen_range(spec.price.factor_permille.0..=spec.price.factor_permille.1);
        drafts.push((arrival, slots, demand, factor));
    }
    drafts.shuffle(&mut rng);
    drafts.sort_by_key(|d| d.0);

    let bids = drafts
        .into_iter()
        .enumerate()
        .map(|(user_id, (arrival, slots, demand, factor))| {
            let total: u64 = demand.iter().map(|&d| u64::from(d)).sum();
            let base = spec.price.base(slots, total, factor);
            Bid {
                user_id,
                arrival,
                slots_required: slots,
                options: options_for(arrival, slots, base, spec.horizon, slack, &spec.price),
                demand: ResourceDemand::new(demand),
            }
        })
        .collect();

    Ok(Instance {
        horizon: spec.horizon,
        capacities: vec![FULL_CAPACITY; spec.num_resources],
        bids,
        seed: spec.seed,
    })
}

/// Price synthesis for traces, which carry no prices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TracePriceModel {
    pub price: PriceModel,
    pub num_options: usize,
    pub slack: Vec<u32>,
    pub seed: u64,
}

impl Default for TracePriceModel {
    fn default() -> Self {
        Self {
            price: PriceModel::default(),
            num_options: 3,
            slack: linear_slack(3, 2, 3),
            seed: 0,
        }
    }
}

pub const TRACE_HEADER: &str = "task_id,arrival_time,duration,cpu,ram";

fn parse_field(line: usize, name: &str, raw: &str) -> Result<f64, WorkloadError> {
    let v: f64 = raw.trim().parse().map_err(|e| WorkloadError::MalformedRow {
        line,
        message: format!("{name}: {e} (got {raw:?})"),
    })?;
    if !v.is_finite() || v < 0.0 {
        return Err(WorkloadError::MalformedRow {
            line,
            message: format!("{name} must be a finite non-negative number, got {raw:?}"),
        });
    }
    Ok(v)
}

fn to_milli(line: usize, name: &str, v: f64) -> Result<u32, WorkloadError> {
    if v > 1.0 {
        return Err(WorkloadError::MalformedRow {
            line,
            message: format!("{name} {v} exceeds the normalized capacity 1"),
        });
    }
    Ok(((v * f64::from(FULL_CAPACITY)).round() as u32).max(1))
}

/// Reads a trace with columns `task_id,arrival_time,duration,cpu,ram`
/// (times in seconds, cpu and ram as fractions of one machine). Arrivals
/// map to 5-minute slots, durations round up to whole slots within
/// `1..=12`, and prices come from `model`. User ids follow row order.
pub fn parse_trace(text: &str, model: &TracePriceModel) -> Result<Instance, WorkloadError> {
    model.price.check()?;
    if model.num_options == 0 || model.slack.len() < model.num_options {
        return Err(WorkloadError::InvalidSpec("slack schedule shorter than num_options".into()));
    }
    if model.slack.windows(2).any(|w| w[1] <= w[0]) {
        return Err(WorkloadError::InvalidSpec("slack schedule must be strictly increasing".into()));
    }
    let slack = &model.slack[..model.num_options];
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed.replace(' ', "") != TRACE_HEADER {
                return Err(WorkloadError::MalformedRow {
                    line,
                    message: format!("expected header `{TRACE_HEADER}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() != 5 {
            return Err(WorkloadError::MalformedRow {
                line,
                message: format!("expected 5 columns, found {}", cols.len()),
            });
        }
        let arrival_s = parse_field(line, "arrival_time", cols[1])?;
        let duration_s = parse_field(line, "duration", cols[2])?;
        let cpu = to_milli(line, "cpu", parse_field(line, "cpu", cols[3])?)?;
        let ram = to_milli(line, "ram", parse_field(line, "ram", cols[4])?)?;
        if arrival_s > 1e9 {
            return Err(WorkloadError::MalformedRow {
                line,
                message: "arrival_time is out of range".into(),
            });
        }
        let arrival = (arrival_s / SLOT_SECONDS).floor() as Slot + 1;
        let slots = ((duration_s / SLOT_SECONDS).ceil().min(f64::from(MAX_TRACE_SLOTS)) as u32).max(1);
        let factor = rng.gen_range(model.price.factor_permille.0..=model.price.factor_permille.1);
        rows.push((arrival, slots, vec![cpu, ram], factor));
    }
    if rows.is_empty() {
        return Err(WorkloadError::EmptyTrace);
    }
    let horizon = rows
        .iter()
        .map(|(a, s, _, _)| a + s - 1 + slack.last().copied().unwrap_or(0))
        .max()
        .unwrap_or(1);
    let bids = rows
        .into_iter()
        .enumerate()
        .map(|(user_id, (arrival, slots, demand, factor))| {
            let total: u64 = demand.iter().map(|&d| u64::from(d)).sum();
            let base = model.price.base(slots, total, factor);
            Bid {
                user_id,
                arrival,
                slots_required: slots,
                options: options_for(arrival, slots, base, horizon, slack, &model.price),
                demand: ResourceDemand::new(demand),
            }
        })
        .collect();
    Ok(Instance {
        horizon,
        capacities: vec![FULL_CAPACITY; 2],
        bids,
        seed: model.seed,
    })
}

pub fn ingest_trace(path: impl AsRef<Path>, model: &TracePriceModel) -> Result<Instance, WorkloadError> {
    let text = std::fs::read_to_string(path)?;
    parse_trace(&text, model)
}
