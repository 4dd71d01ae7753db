//! Online cloud resource auctions with elastic jobs and soft deadlines.
//!
//! Users bid for multi-resource jobs that need a number of (not necessarily
//! contiguous) slots and offer an XOR menu of deadlines with prices. The
//! crate provides the slot-by-slot allocation engine with two eviction
//! valuations (T-RUEM and T-RWAEM), the soft-acceptance protocol on top of
//! it, random and greedy baselines, an exact optimum for small and sparse
//! instances, workload generation and experiment sweeps.

pub mod baselines;
pub mod config;
pub mod engine;
pub mod evaluators;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod online;
pub mod oracle;
pub mod workload;

pub use engine::{run_offline, EngineConfig, Strategy};
pub use model::{Bid, DeadlineOption, Instance, Outcome, Price, ResourceDemand, Schedule, Slot};
pub use online::run_online;
pub use oracle::{solve_exact, solve_exhaustive, OracleLimits, OracleResult, OracleStatus};
