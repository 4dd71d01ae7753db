//! Seeded parameter sweeps: every algorithm on generated instances over a
//! grid of user counts, resource counts and option counts.
//!
//! The instance of repetition `k` in cell `(U, M, B)` is seeded by a hash
//! of the base seed, `U`, `M` and `k`. `B` is left out on purpose: the
//! generator draws option menus as prefixes of one sequence, so cells that
//! differ only in `B` compare the same users.

use std::fmt::{self, Write as _};
use std::hash::Hasher;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use fnv::FnvHasher;
use rayon::prelude::*;

use crate::baselines::{run_greedy, run_random};
use crate::config::{parse_bool, parse_list, parse_range, ConfigError, KeyValues};
use crate::engine::{run_offline, EngineConfig, Strategy};
use crate::metrics::summarize;
use crate::model::{Instance, Price};
use crate::online::run_online;
use crate::oracle::{solve_exact, OracleError, OracleLimits, OracleStatus};
use crate::workload::{generate, GeneratorSpec, PriceBasis, WorkloadError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Truem,
    Trwaem,
    Greedy,
    Random,
    Oracle,
    OnlineTruem,
    OnlineTrwaem,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Truem,
        Algorithm::Trwaem,
        Algorithm::Greedy,
        Algorithm::Random,
        Algorithm::Oracle,
        Algorithm::OnlineTruem,
        Algorithm::OnlineTrwaem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Truem => "truem",
            Algorithm::Trwaem => "trwaem",
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
            Algorithm::Oracle => "oracle",
            Algorithm::OnlineTruem => "online-truem",
            Algorithm::OnlineTrwaem => "online-trwaem",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm `{0}` (expected one of truem, trwaem, greedy, random, oracle, online-truem, online-trwaem)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

/// Horizon as a function of the user count: `per_user * U + base`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HorizonRule {
    pub per_user: u32,
    pub base: u32,
}

impl HorizonRule {
    pub fn horizon(&self, users: usize) -> u32 {
        let users = u32::try_from(users).unwrap_or(u32::MAX);
        self.per_user.saturating_mul(users).saturating_add(self.base)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    /// Prefix of output files, e.g. `exp1`.
    pub name: String,
    pub users: Vec<usize>,
    pub resources: Vec<usize>,
    pub options: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub horizon: HorizonRule,
    /// Template for generated instances; the grid sets users, resources,
    /// options, horizon and seed.
    pub generator: GeneratorSpec,
    /// `None` skips the oracle and leaves ratios empty.
    pub oracle: Option<OracleLimits>,
    /// Record wall-clock runtimes. Off by default so that reruns give
    /// byte-identical files.
    pub timings: bool,
}

pub const CONFIG_KEYS: [&str; 20] = [
    "experiment",
    "users",
    "resources",
    "options",
    "algorithms",
    "repetitions",
    "seed",
    "horizon_per_user",
    "horizon_base",
    "slots_required",
    "demand",
    "price_basis",
    "price_scale",
    "price_factor",
    "price_decay",
    "slack",
    "oracle",
    "oracle_timeout_s",
    "oracle_max_nodes",
    "timings",
];

fn sweep_limits() -> OracleLimits {
    OracleLimits {
        max_users: 1000,
        ..OracleLimits::default()
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self::experiment(1).expect("preset 1 exists")
    }
}

impl SweepConfig {
    /// The four preset experiments. All share the generator template and
    /// the horizon `3U + 12`.
    pub fn experiment(n: u32) -> Option<Self> {
        use Algorithm::*;
        let heuristics = vec![Truem, Trwaem, Greedy, Random];
        let with_oracle = vec![Truem, Trwaem, Greedy, Random, Oracle];
        let (users, resources, options, algorithms, oracle) = match n {
            1 => (vec![10, 20, 30, 40, 50], vec![2], vec![1], with_oracle, true),
            2 => (vec![100, 150, 200], vec![2], vec![3, 6, 9], heuristics, false),
            3 => (vec![10, 20, 30, 40, 50], vec![2], vec![3, 6, 9], with_oracle, true),
            4 => (vec![100, 150, 200], vec![2, 3, 4], vec![3], heuristics, false),
            _ => return None,
        };
        Some(Self {
            name: format!("exp{n}"),
            users,
            resources,
            options,
            algorithms,
            repetitions: 100,
            base_seed: u64::from(n),
            horizon: HorizonRule { per_user: 3, base: 12 },
            generator: GeneratorSpec::default(),
            oracle: oracle.then(sweep_limits),
            timings: false,
        })
    }

    /// Reads a configuration file. Without an `experiment` key the keys
    /// override experiment 1 and outputs are named `sweep`.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let kv = KeyValues::parse(text, &CONFIG_KEYS)?;
        let preset = kv.get_with("experiment", |raw| {
            let n: u32 = raw.parse().map_err(|e| format!("{e} (got {raw:?})"))?;
            Self::experiment(n).ok_or_else(|| format!("no experiment {n} (expected 1 to 4)"))
        })?;
        let mut cfg = match preset {
            Some(cfg) => cfg,
            None => Self {
                name: "sweep".into(),
                ..Self::default()
            },
        };
        let usize_list = |raw: &str| -> Result<Vec<usize>, String> {
            let list = parse_list(raw)?;
            list.into_iter()
                .map(|v| usize::try_from(v).map_err(|e| e.to_string()))
                .collect()
        };
        if let Some(v) = kv.get_with("users", usize_list)? {
            cfg.users = v;
        }
        if let Some(v) = kv.get_with("resources", usize_list)? {
            cfg.resources = v;
        }
        if let Some(v) = kv.get_with("options", usize_list)? {
            cfg.options = v;
        }
        if let Some(v) = kv.get_with("algorithms", |raw| {
            raw.split(',')
                .map(|a| a.trim().parse::<Algorithm>().map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()
        })? {
            cfg.algorithms = v;
        }
        if let Some(v) = kv.get("repetitions")? {
            cfg.repetitions = v;
        }
        if let Some(v) = kv.get("seed")? {
            cfg.base_seed = v;
        }
        if let Some(v) = kv.get("horizon_per_user")? {
            cfg.horizon.per_user = v;
        }
        if let Some(v) = kv.get("horizon_base")? {
            cfg.horizon.base = v;
        }
        let g = &mut cfg.generator;
        if let Some(v) = kv.get_with("slots_required", parse_range)? {
            g.slots_required = v;
        }
        if let Some(v) = kv.get_with("demand", parse_range)? {
            g.demand = v;
        }
        if let Some(v) = kv.get_with("price_basis", |raw| match raw {
            "flat" => Ok(PriceBasis::Flat),
            "footprint" => Ok(PriceBasis::Footprint),
            other => Err(format!("expected flat or footprint, got {other:?}")),
        })? {
            g.price.basis = v;
        }
        if let Some(v) = kv.get("price_scale")? {
            g.price.scale = v;
        }
        if let Some(v) = kv.get_with("price_factor", parse_range)? {
            g.price.factor_permille = v;
        }
        if let Some(v) = kv.get("price_decay")? {
            g.price.decay_permille = v;
        }
        if let Some(v) = kv.get_with("slack", |raw| {
            parse_list(raw)?
                .into_iter()
                .map(|v| u32::try_from(v).map_err(|e| e.to_string()))
                .collect::<Result<Vec<u32>, String>>()
        })? {
            g.slack = v;
        }
        if let Some(on) = kv.get_with("oracle", parse_bool)? {
            cfg.oracle = on.then(|| cfg.oracle.unwrap_or_else(sweep_limits));
        }
        if let Some(secs) = kv.get::<u64>("oracle_timeout_s")? {
            if let Some(l) = cfg.oracle.as_mut() {
                l.timeout = Duration::from_secs(secs);
            }
        }
        if let Some(nodes) = kv.get::<u64>("oracle_max_nodes")? {
            if let Some(l) = cfg.oracle.as_mut() {
                l.max_nodes = nodes;
            }
        }
        if let Some(v) = kv.get_with("timings", parse_bool)? {
            cfg.timings = v;
        }
        cfg.check().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::InvalidConfig(m.to_string()));
        if self.users.is_empty() || self.resources.is_empty() || self.options.is_empty() {
            return bad("the grid is empty");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithm selected");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.algorithms.contains(&Algorithm::Oracle) && self.oracle.is_none() {
            return bad("the oracle algorithm needs `oracle = true`");
        }
        for cell in self.cells() {
            self.spec(&cell, 0)?.check()?;
        }
        Ok(())
    }

    /// Grid cells, users outermost.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &users in &self.users {
            for &resources in &self.resources {
                for &options in &self.options {
                    out.push(Cell { users, resources, options });
                }
            }
        }
        out
    }

    pub fn instance_seed(&self, cell: &Cell, repetition: usize) -> u64 {
        let mut h = FnvHasher::default();
        for v in [self.base_seed, cell.users as u64, cell.resources as u64, repetition as u64] {
            h.write_u64(v);
        }
        h.finish()
    }

    /// Generator input for one run.
    pub fn spec(&self, cell: &Cell, repetition: usize) -> Result<GeneratorSpec, SweepError> {
        Ok(GeneratorSpec {
            num_users: cell.users,
            num_resources: cell.resources,
            num_options: cell.options,
            horizon: self.horizon.horizon(cell.users),
            seed: self.instance_seed(cell, repetition),
            ..self.generator.clone()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub users: usize,
    pub resources: usize,
    pub options: usize,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("u{}_m{}_b{}", self.users, self.resources, self.options)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("oracle failed on instance {seed:016x}: {source}")]
    Oracle { seed: u64, source: OracleError },
    #[error("engine failed on instance {seed:016x}: {message}")]
    Engine { seed: u64, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("writing results: {0}")]
    Io(#[from] std::io::Error),
}

/// One algorithm on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub instance_seed: u64,
    pub algorithm: Algorithm,
    pub welfare: Price,
    /// Optimum, when the oracle ran and finished.
    pub oracle: Option<Price>,
    pub oracle_status: Option<OracleStatus>,
    pub ratio: Option<f64>,
    pub moves: u64,
    pub runtime: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    /// Per algorithm, in configuration order, one row per repetition.
    pub rows: Vec<(Algorithm, Vec<RunRow>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub algorithm: Algorithm,
    pub runs: usize,
    /// Runs whose oracle did not finish.
    pub excluded: usize,
    pub mean_ratio: Option<f64>,
    pub stddev_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub mean_welfare: f64,
    pub mean_moves: f64,
}

impl CellResult {
    pub fn summaries(&self) -> Vec<CellSummary> {
        self.rows
            .iter()
            .map(|(algorithm, rows)| {
                let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
                let stats = summarize(&ratios);
                let excluded = rows
                    .iter()
                    .filter(|r| r.oracle_status == Some(OracleStatus::LimitExceeded))
                    .count();
                let n = rows.len().max(1) as f64;
                CellSummary {
                    cell: self.cell,
                    algorithm: *algorithm,
                    runs: rows.len(),
                    excluded,
                    mean_ratio: stats.map(|s| s.mean),
                    stddev_ratio: stats.map(|s| s.stddev),
                    min_ratio: stats.map(|s| s.min),
                    max_ratio: stats.map(|s| s.max),
                    mean_welfare: rows.iter().map(|r| r.welfare as f64).sum::<f64>() / n,
                    mean_moves: rows.iter().map(|r| r.moves as f64).sum::<f64>() / n,
                }
            })
            .collect()
    }

    pub fn summary(&self, algorithm: Algorithm) -> Option<CellSummary> {
        self.summaries().into_iter().find(|s| s.algorithm == algorithm)
    }
}

fn engine_err(seed: u64, e: impl fmt::Display) -> SweepError {
    SweepError::Engine { seed, message: e.to_string() }
}

/// Runs every configured algorithm on one instance.
pub fn run_instance(
    inst: &Instance,
    algorithms: &[Algorithm],
    oracle: Option<&OracleLimits>,
    timings: bool,
) -> Result<Vec<RunRow>, SweepError> {
    let seed = inst.seed;
    let optimum = match oracle {
        None => None,
        Some(limits) => Some(match solve_exact(inst, limits) {
            Ok(r) => r,
            Err(OracleError::LimitExceeded(r)) => *r,
            Err(source) => return Err(SweepError::Oracle { seed, source }),
        }),
    };
    let mut rows = Vec::with_capacity(algorithms.len());
    for &algorithm in algorithms {
        let started = Instant::now();
        let (welfare, moves) = match algorithm {
            Algorithm::Truem | Algorithm::Trwaem => {
                let strategy = if algorithm == Algorithm::Truem { Strategy::Truem } else { Strategy::Trwaem };
                let (_, report) = run_offline(inst, &EngineConfig::new(strategy)).map_err(|e| engine_err(seed, e))?;
                (report.welfare, report.move_count)
            }
            Algorithm::OnlineTruem | Algorithm::OnlineTrwaem => {
                let strategy = if algorithm == Algorithm::OnlineTruem { Strategy::Truem } else { Strategy::Trwaem };
                let (_, _, report) = run_online(inst, &EngineConfig::new(strategy)).map_err(|e| engine_err(seed, e))?;
                (report.welfare, report.move_count)
            }
            Algorithm::Greedy => (run_greedy(inst).1.welfare, 0),
            Algorithm::Random => (run_random(inst, random_seed(seed)).1.welfare, 0),
            Algorithm::Oracle => match &optimum {
                Some(r) => (r.optimum_welfare, 0),
                None => return Err(SweepError::InvalidConfig("the oracle algorithm needs oracle limits".into())),
            },
        };
        let runtime = if algorithm == Algorithm::Oracle {
            optimum.as_ref().map(|r| r.elapsed)
        } else {
            Some(started.elapsed())
        };
        let finished = optimum.as_ref().filter(|r| r.status == OracleStatus::Optimal);
        rows.push(RunRow {
            instance_seed: seed,
            algorithm,
            welfare,
            oracle: finished.map(|r| r.optimum_welfare),
            oracle_status: optimum.as_ref().map(|r| r.status),
            ratio: finished.map(|r| crate::metrics::ratio(welfare, r.optimum_welfare)),
            moves,
            runtime: runtime.filter(|_| timings),
        });
    }
    Ok(rows)
}

/// Seed of the random baseline on the instance seeded `instance_seed`.
pub fn random_seed(instance_seed: u64) -> u64 {
    instance_seed ^ 0x5eed_0f_7a4d_0b5e
}

/// Runs the sweep on up to `workers` threads. The result does not depend
/// on `workers`.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<Vec<CellResult>, SweepError> {
    cfg.check()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.repetitions).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let outputs: Vec<Result<Vec<RunRow>, SweepError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| {
                let inst = generate(&cfg.spec(&cells[c], r)?)?;
                run_instance(&inst, &cfg.algorithms, cfg.oracle.as_ref(), cfg.timings)
            })
            .collect()
    });

    let mut results: Vec<CellResult> = cells
        .iter()
        .map(|&cell| CellResult {
            cell,
            rows: cfg.algorithms.iter().map(|&a| (a, Vec::with_capacity(cfg.repetitions))).collect(),
        })
        .collect();
    for (&(c, _), out) in jobs.iter().zip(outputs) {
        for (k, row) in out?.into_iter().enumerate() {
            results[c].rows[k].1.push(row);
        }
    }
    Ok(results)
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

pub const RUN_HEADER: &str = "instance_seed,algorithm,welfare,oracle,ratio,moves,runtime_ms";
pub const SUMMARY_HEADER: &str =
    "experiment,cell,users,resources,options,algorithm,runs,excluded,mean_ratio,stddev_ratio,min_ratio,max_ratio,mean_welfare,mean_moves";

pub fn runs_csv(rows: &[RunRow]) -> String {
    let mut out = String::from(RUN_HEADER);
    out.push('\n');
    for r in rows {
        let runtime = r.runtime.map(|d| d.as_secs_f64() * 1000.0);
        let _ = writeln!(
            out,
            "{:016x},{},{},{},{},{},{}",
            r.instance_seed,
            r.algorithm,
            r.welfare,
            opt(r.oracle),
            opt_f(r.ratio),
            r.moves,
            runtime.map_or_else(String::new, |v| format!("{v:.3}")),
        );
    }
    out
}

pub fn summary_csv(name: &str, results: &[CellResult]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for result in results {
        for s in result.summaries() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{:.3}",
                name,
                s.cell.label(),
                s.cell.users,
                s.cell.resources,
                s.cell.options,
                s.algorithm,
                s.runs,
                s.excluded,
                opt_f(s.mean_ratio),
                opt_f(s.stddev_ratio),
                opt_f(s.min_ratio),
                opt_f(s.max_ratio),
                s.mean_welfare,
                s.mean_moves,
            );
        }
    }
    out
}

/// Writes `<name>_<cell>_<algorithm>.csv` per cell and algorithm, then
/// `summary.csv`. Returns the paths written.
pub fn write_results(dir: &Path, name: &str, results: &[CellResult]) -> Result<Vec<std::path::PathBuf>, SweepError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for result in results {
        for (algorithm, rows) in &result.rows {
            let path = dir.join(format!("{name}_{}_{algorithm}.csv", result.cell.label()));
            std::fs::write(&path, runs_csv(rows))?;
            written.push(path);
        }
    }
    let path = dir.join("summary.csv");
    std::fs::write(&path, summary_csv(name, results))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(name: &str) -> SweepConfig {
        SweepConfig {
            name: name.into(),
            users: vec![4, 6],
            resources: vec![2],
            options: vec![1, 2],
            repetitions: 3,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("best".parse::<Algorithm>().is_err());
    }

    #[test]
    fn presets_match_the_grids() {
        let e1 = SweepConfig::experiment(1).unwrap();
        assert_eq!(e1.cells().len(), 5);
        assert_eq!(e1.algorithms.len(), 5);
        assert!(e1.oracle.is_some());
        let e2 = SweepConfig::experiment(2).unwrap();
        assert_eq!(e2.cells().len(), 9);
        assert!(e2.oracle.is_none());
        assert_eq!(SweepConfig::experiment(3).unwrap().cells().len(), 15);
        assert_eq!(SweepConfig::experiment(4).unwrap().cells().len(), 9);
        assert!(SweepConfig::experiment(5).is_none());
    }

    #[test]
    fn seeds_ignore_the_option_count() {
        let cfg = tiny("t");
        let a = Cell { users: 4, resources: 2, options: 1 };
        let b = Cell { options: 2, ..a };
        assert_eq!(cfg.instance_seed(&a, 0), cfg.instance_seed(&b, 0));
        assert_ne!(cfg.instance_seed(&a, 0), cfg.instance_seed(&a, 1));
        assert_ne!(cfg.instance_seed(&a, 0), cfg.instance_seed(&Cell { users: 6, ..a }, 0));
    }

    #[test]
    fn sweep_is_independent_of_workers() {
        let cfg = tiny("t");
        let one = run_sweep(&cfg, 1).unwrap();
        let three = run_sweep(&cfg, 3).unwrap();
        assert_eq!(one, three);
        assert_eq!(summary_csv("t", &one), summary_csv("t", &three));
        assert_eq!(one.len(), 4);
        for cell in &one {
            for (_, rows) in &cell.rows {
                assert_eq!(rows.len(), 3);
                assert!(rows.iter().all(|r| r.runtime.is_none()));
            }
            for s in cell.summaries() {
                assert!(s.max_ratio.unwrap() <= 1.0);
            }
            assert_eq!(cell.summary(Algorithm::Oracle).unwrap().min_ratio, Some(1.0));
        }
    }

    #[test]
    fn no_oracle_leaves_ratios_empty() {
        let cfg = SweepConfig {
            oracle: None,
            algorithms: vec![Algorithm::Trwaem, Algorithm::Greedy],
            ..tiny("t")
        };
        let out = run_sweep(&cfg, 1).unwrap();
        let csv = runs_csv(&out[0].rows[0].1);
        assert!(csv.lines().skip(1).all(|l| l.contains(",,,")), "{csv}");
        let s = out[0].summary(Algorithm::Trwaem).unwrap();
        assert_eq!(s.mean_ratio, None);
    }

    #[test]
    fn config_text_overrides_the_preset() {
        let cfg = SweepConfig::from_text("experiment = 3\nusers = 10..20:10\nrepetitions = 2\noracle_timeout_s = 5\n").unwrap();
        assert_eq!(cfg.name, "exp3");
        assert_eq!(cfg.users, vec![10, 20]);
        assert_eq!(cfg.options, vec![3, 6, 9]);
        assert_eq!(cfg.oracle.unwrap().timeout, Duration::from_secs(5));

        let err = SweepConfig::from_text("users = 10\nspeed = 3\n").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { line: 2, key: "speed".into() });
        let err = SweepConfig::from_text("algorithms = truem, best\n").unwrap_err();
        assert!(err.to_string().contains("best"), "{err}");
        assert!(SweepConfig::from_text("repetitions = 0").is_err());
        assert!(SweepConfig::from_text("oracle = false").is_err(), "oracle algorithm without oracle");
        assert!(SweepConfig::from_text("experiment = 7").is_err());
    }
}
