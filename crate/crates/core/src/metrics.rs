//! Run reports, competitive ratios and their aggregation.

use std::time::Duration;

use crate::model::{welfare, Instance, Price, Schedule, Slot};
use crate::oracle::{OracleResult, OracleStatus};

/// Payment recorded for one completed user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Settlement {
    pub user_id: usize,
    pub option: usize,
    pub completion: Slot,
    pub payment: Price,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub welfare: Price,
    pub accepted_count: usize,
    pub rejected_count: usize,
    pub move_count: u64,
    /// Mean usage over the horizon divided by capacity, per resource.
    pub utilization: Vec<f64>,
    pub settlements: Vec<Settlement>,
    pub runtime: Duration,
    pub instance_digest: u64,
}

impl RunReport {
    pub fn from_schedule(inst: &Instance, sched: &Schedule, move_count: u64, runtime: Duration) -> Self {
        let usage = sched.usage(inst);
        let horizon = f64::from(inst.horizon.max(1));
        let utilization = inst
            .capacities
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                let total: u64 = usage.iter().map(|row| row[m]).sum();
                total as f64 / (f64::from(c.max(1)) * horizon)
            })
            .collect();
        let accepted_count = sched.accepted_count();
        Self {
            welfare: welfare(inst, sched),
            accepted_count,
            rejected_count: inst.num_users() - accepted_count,
            move_count,
            utilization,
            settlements: crate::engine::settlements(sched),
            runtime,
            instance_digest: inst.digest(),
        }
    }

    pub fn settled_total(&self) -> Price {
        self.settlements.iter().map(|s| s.payment).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompetitiveReport {
    pub ratio: f64,
    pub algorithm_welfare: Price,
    pub oracle_welfare: Price,
    pub oracle_status: OracleStatus,
}

impl CompetitiveReport {
    /// Whether the report enters aggregates.
    pub fn is_included(&self) -> bool {
        self.oracle_status == OracleStatus::Optimal
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("run and oracle were computed on different instances ({run:016x} vs {oracle:016x})")]
    MismatchedInstance { run: u64, oracle: u64 },
    #[error("no report left to aggregate ({excluded} excluded)")]
    AllExcluded { excluded: usize },
}

/// `algorithm / oracle`, with 1 when the oracle welfare is 0.
pub fn ratio(algorithm: Price, oracle: Price) -> f64 {
    if oracle == 0 {
        1.0
    } else {
        algorithm as f64 / oracle as f64
    }
}

pub fn competitive_ratio(run: &RunReport, oracle: &OracleResult) -> Result<CompetitiveReport, MetricsError> {
    if run.instance_digest != oracle.instance_digest {
        return Err(MetricsError::MismatchedInstance {
            run: run.instance_digest,
            oracle: oracle.instance_digest,
        });
    }
    Ok(CompetitiveReport {
        ratio: ratio(run.welfare, oracle.optimum_welfare),
        algorithm_welfare: run.welfare,
        oracle_welfare: oracle.optimum_welfare,
        oracle_status: oracle.status,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub n_excluded: usize,
}

/// Mean, deviation and range of plain values. The result does not depend on
/// the input order.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(Summary {
        mean,
        stddev: var.sqrt(),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        n: sorted.len(),
        n_excluded: 0,
    })
}

/// Summarizes the ratios of reports whose oracle was optimal.
pub fn aggregate(reports: &[CompetitiveReport]) -> Result<Summary, MetricsError> {
    let included: Vec<f64> = reports.iter().filter(|r| r.is_included()).map(|r| r.ratio).collect();
    let excluded = reports.len() - included.len();
    let mut summary = summarize(&included).ok_or(MetricsError::AllExcluded { excluded })?;
    summary.n_excluded = excluded;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Schedule;

    fn report(ratio: f64, status: OracleStatus) -> CompetitiveReport {
        CompetitiveReport {
            ratio,
            algorithm_welfare: 0,
            oracle_welfare: 0,
            oracle_status: status,
        }
    }

    fn oracle(welfare: Price, digest: u64) -> OracleResult {
        OracleResult {
            optimum_welfare: welfare,
            witness: Schedule::default(),
            nodes_explored: 0,
            elapsed: Duration::ZERO,
            status: OracleStatus::Optimal,
            instance_digest: digest,
        }
    }

    fn run(welfare: Price, digest: u64) -> RunReport {
        RunReport {
            welfare,
            accepted_count: 0,
            rejected_count: 0,
            move_count: 0,
            utilization: vec![],
            settlements: vec![],
            runtime: Duration::ZERO,
            instance_digest: digest,
        }
    }

    #[test]
    fn ratio_cases() {
        assert_eq!(competitive_ratio(&run(15, 1), &oracle(15, 1)).unwrap().ratio, 1.0);
        assert_eq!(competitive_ratio(&run(0, 1), &oracle(15, 1)).unwrap().ratio, 0.0);
        assert_eq!(competitive_ratio(&run(0, 1), &oracle(0, 1)).unwrap().ratio, 1.0);
        assert_eq!(
            competitive_ratio(&run(3, 1), &oracle(4, 2)),
            Err(MetricsError::MismatchedInstance { run: 1, oracle: 2 })
        );
    }

    #[test]
    fn aggregate_basics() {
        let s = aggregate(&[report(1.0, OracleStatus::Optimal), report(0.5, OracleStatus::Optimal)]).unwrap();
        assert_eq!(s.mean, 0.75);
        assert_eq!(s.stddev, 0.25);
        assert_eq!((s.min, s.max, s.n, s.n_excluded), (0.5, 1.0, 2, 0));

        let s = aggregate(&[report(0.8, OracleStatus::Optimal)]).unwrap();
        assert_eq!((s.mean, s.stddev), (0.8, 0.0));
    }

    #[test]
    fn limit_exceeded_is_excluded() {
        let s = aggregate(&[
            report(0.6, OracleStatus::Optimal),
            report(1.4, OracleStatus::LimitExceeded),
        ])
        .unwrap();
        assert_eq!((s.mean, s.n, s.n_excluded), (0.6, 1, 1));
        assert_eq!(
            aggregate(&[report(1.0, OracleStatus::LimitExceeded)]),
            Err(MetricsError::AllExcluded { excluded: 1 })
        );
        assert_eq!(aggregate(&[]), Err(MetricsError::AllExcluded { excluded: 0 }));
    }

    #[test]
    fn aggregate_ignores_order() {
        let a: Vec<_> = [0.1, 0.7, 0.33, 0.9, 0.41]
            .iter()
            .map(|&r| report(r, OracleStatus::Optimal))
            .collect();
        let mut b = a.clone();
        b.reverse();
        b.swap(0, 2);
        assert_eq!(aggregate(&a).unwrap(), aggregate(&b).unwrap());
    }
}
