//! `auction-sim`: generate instances, run the allocation algorithms, solve
//! for the optimum and execute experiment sweeps.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use auction_core::engine::{run_traced, trace_csv};
use auction_core::baselines::{run_greedy, run_random};
use auction_core::experiment::{random_seed, run_sweep, runs_csv, summary_csv, write_results, Algorithm, RunRow, SweepConfig};
use auction_core::metrics::{ratio, RunReport};
use auction_core::model::{emit_instance, emit_schedule, parse_instance, parse_schedule, validate_instance, validate_schedule, Instance};
use auction_core::online::events_csv;
use auction_core::workload::{generate, ingest_trace, TracePriceModel};
use auction_core::{run_online, solve_exact, EngineConfig, OracleLimits, OracleStatus, Strategy};

/// Environment variable capping the sweep worker threads.
const WORKERS_ENV: &str = "AUCTION_SIM_WORKERS";

#[derive(Parser)]
#[command(name = "auction-sim", version, about = "Online cloud resource auction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one instance file per grid cell and repetition of a config.
    Generate {
        /// Sweep config (`key = value` lines); see the README for keys.
        #[arg(conflicts_with = "trace")]
        config: Option<PathBuf>,
        /// Convert a cluster trace CSV instead of drawing instances.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Output directory (config) or file (trace).
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run one algorithm on an instance and print a report row.
    Run {
        instance: PathBuf,
        /// truem, trwaem, greedy, random, oracle, online-truem or online-trwaem.
        #[arg(long, short)]
        algorithm: Algorithm,
        /// Append the report row to this CSV instead of printing it.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the resulting schedule.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Write the engine step trace (engine algorithms) or the
        /// soft-acceptance event log (online algorithms).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Seed of the random baseline; derived from the instance by default.
        #[arg(long)]
        seed: Option<u64>,
        /// Record the wall-clock runtime in the report row.
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Solve an instance exactly and print the optimum.
    Oracle {
        instance: PathBuf,
        /// Write the optimal schedule.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Run experiment 1 to 4, optionally overridden by a config file.
    Experiment {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=4))]
        number: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, short, default_value = "results")]
        out: PathBuf,
        /// Override the repetitions per cell.
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Check an instance, and optionally a schedule against it.
    Validate {
        instance: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct LimitArgs {
    /// Oracle time limit in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// Oracle search node limit.
    #[arg(long, default_value_t = 50_000_000)]
    max_nodes: u64,
}

impl LimitArgs {
    fn limits(&self) -> OracleLimits {
        OracleLimits {
            max_users: usize::MAX,
            max_nodes: self.max_nodes,
            timeout: Duration::from_secs(self.timeout),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_config(path: &Path) -> Result<SweepConfig> {
    SweepConfig::from_text(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn workers() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn cmd_generate(config: Option<&Path>, trace: Option<&Path>, out: &Path) -> Result<()> {
    if let Some(trace) = trace {
        let inst = ingest_trace(trace, &TracePriceModel::default()).with_context(|| format!("{}", trace.display()))?;
        write(out, &emit_instance(&inst))?;
        println!("{}: {} users, horizon {}", out.display(), inst.num_users(), inst.horizon);
        return Ok(());
    }
    let Some(config) = config else {
        bail!("give a config file or --trace");
    };
    let cfg = load_config(config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut count = 0;
    for cell in cfg.cells() {
        for rep in 0..cfg.repetitions {
            let inst = generate(&cfg.spec(&cell, rep)?)?;
            let violations = validate_instance(&inst);
            if let Some(v) = violations.first() {
                bail!("generated an invalid instance for {}: {v}", cell.label());
            }
            write(&out.join(format!("{}_r{rep}.txt", cell.label())), &emit_instance(&inst))?;
            count += 1;
        }
    }
    println!("wrote {count} instance files to {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    instance: &Path,
    algorithm: Algorithm,
    report: Option<&Path>,
    schedule: Option<&Path>,
    trace: Option<&Path>,
    seed: Option<u64>,
    timings: bool,
    limits: &LimitArgs,
) -> Result<()> {
    let inst = load_instance(instance)?;
    let violations = validate_instance(&inst);
    if let Some(v) = violations.first() {
        bail!("{}: {v}", instance.display());
    }
    let engine = EngineConfig::new;
    let mut oracle = None;
    let (sched, run, log) = match algorithm {
        Algorithm::Truem | Algorithm::Trwaem => {
            let strategy = if algorithm == Algorithm::Truem { Strategy::Truem } else { Strategy::Trwaem };
            let (sched, report, events) = run_traced(&inst, &engine(strategy))?;
            (sched, report, Some(trace_csv(&events)))
        }
        Algorithm::OnlineTruem | Algorithm::OnlineTrwaem => {
            let strategy = if algorithm == Algorithm::OnlineTruem { Strategy::Truem } else { Strategy::Trwaem };
            let (sched, events, report) = run_online(&inst, &engine(strategy))?;
            (sched, report, Some(events_csv(&events)))
        }
        Algorithm::Greedy => {
            let (sched, report) = run_greedy(&inst);
            (sched, report, None)
        }
        Algorithm::Random => {
            let (sched, report) = run_random(&inst, seed.unwrap_or_else(|| random_seed(inst.seed)));
            (sched, report, None)
        }
        Algorithm::Oracle => {
            let result = match solve_exact(&inst, &limits.limits()) {
                Ok(r) => r,
                Err(e) => e.into_lower_bound().context("oracle failed")?,
            };
            let report = RunReport::from_schedule(&inst, &result.witness, 0, result.elapsed);
            let sched = result.witness.clone();
            oracle = Some(result);
            (sched, report, None)
        }
    };
    let finished = oracle.as_ref().filter(|r| r.status == OracleStatus::Optimal);
    let rows = [RunRow {
        instance_seed: inst.seed,
        algorithm,
        welfare: run.welfare,
        oracle: finished.map(|r| r.optimum_welfare),
        oracle_status: oracle.as_ref().map(|r| r.status),
        ratio: finished.map(|r| ratio(run.welfare, r.optimum_welfare)),
        moves: run.move_count,
        runtime: timings.then_some(run.runtime),
    }];
    if let Some(path) = schedule {
        write(path, &emit_schedule(&sched))?;
    }
    match (trace, log) {
        (Some(path), Some(log)) => write(path, &log)?,
        (Some(_), None) => bail!("{algorithm} produces no trace"),
        _ => {}
    }

    let csv = runs_csv(&rows);
    match report {
        Some(path) => {
            let fresh = !path.exists();
            let mut f = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .with_context(|| format!("opening {}", path.display()))?;
            let body = if fresh { csv.as_str() } else { csv.split_once('\n').map_or("", |(_, rest)| rest) };
            f.write_all(body.as_bytes())?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_oracle(instance: &Path, schedule: Option<&Path>, limits: &LimitArgs) -> Result<ExitCode> {
    let inst = load_instance(instance)?;
    let (result, code) = match solve_exact(&inst, &limits.limits()) {
        Ok(r) => (r, ExitCode::SUCCESS),
        Err(e) => match e.into_lower_bound() {
            Some(r) => (r, ExitCode::from(2)),
            None => bail!("oracle failed on {}", instance.display()),
        },
    };
    println!("status,optimum,nodes");
    println!("{:?},{},{}", result.status, result.optimum_welfare, result.nodes_explored);
    if let Some(path) = schedule {
        write(path, &emit_schedule(&result.witness))?;
    }
    Ok(code)
}

fn cmd_experiment(number: u32, config: Option<&Path>, out: &Path, repetitions: Option<usize>) -> Result<()> {
    let mut cfg = match config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.name != format!("exp{number}") {
                bail!("{} configures {}, not experiment {number}", path.display(), cfg.name);
            }
            cfg
        }
        None => SweepConfig::experiment(number).context("no such experiment")?,
    };
    if let Some(r) = repetitions {
        cfg.repetitions = r;
    }
    let results = run_sweep(&cfg, workers()?)?;
    let written = write_results(out, &cfg.name, &results)?;
    print!("{}", summary_csv(&cfg.name, &results));
    eprintln!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn cmd_validate(instance: &Path, schedule: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(instance)?;
    let mut violations = validate_instance(&inst);
    if violations.is_empty() {
        if let Some(path) = schedule {
            let sched = parse_schedule(&read(path)?).with_context(|| format!("{}", path.display()))?;
            violations = validate_schedule(&inst, &sched);
        }
    }
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("ok");
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, trace, out } => cmd_generate(config.as_deref(), trace.as_deref(), &out)?,
        Command::Run {
            instance,
            algorithm,
            report,
            schedule,
            trace,
            seed,
            timings,
            limits,
        } => cmd_run(&instance, algorithm, report.as_deref(), schedule.as_deref(), trace.as_deref(), seed, timings, &limits)?,
        Command::Oracle { instance, schedule, limits } => return cmd_oracle(&instance, schedule.as_deref(), &limits),
        Command::Experiment {
            number,
            config,
            out,
            repetitions,
        } => cmd_experiment(number, config.as_deref(), &out, repetitions)?,
        Command::Validate { instance, schedule } => return cmd_validate(&instance, schedule.as_deref()),
    }
    Ok(ExitCode::SUCCESS)
}
