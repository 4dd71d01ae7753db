//! Exact welfare optimum, used as the competitive-ratio denominator.
//!
//! [`solve_exact`] is a branch and bound over each user's option choice
//! (reject or one deadline option) with a slot-level feasibility search for
//! the chosen jobs. [`solve_exhaustive`] is an independent brute-force
//! solver for tiny instances and serves as its test oracle.

mod exact;
mod exhaustive;
mod packing;
mod timeline;

use std::time::Duration;

#[cfg(test)]
use exact::{solve_with, Method};
pub use exact::solve_exact;
pub use exhaustive::solve_exhaustive;

use crate::model::{Price, Schedule, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleStatus {
    Optimal,
    /// The search stopped early; the welfare is only a lower bound.
    LimitExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum_welfare: Price,
    pub witness: Schedule,
    pub nodes_explored: u64,
    pub elapsed: Duration,
    pub status: OracleStatus,
    pub instance_digest: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_users: usize,
    pub max_nodes: u64,
    pub timeout: Duration,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_users: 8,
            max_nodes: 50_000_000,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{users} users exceed the oracle limit of {limit}")]
    TooManyUsers { users: usize, limit: usize },
    #[error("invalid instance: {}", .0.first().map(ToString::to_string).unwrap_or_default())]
    InvalidInstance(Vec<Violation>),
    /// Node or time budget exhausted. Carries the best schedule found,
    /// whose welfare is a lower bound on the optimum.
    #[error("search limit exceeded; best welfare found {}", .0.optimum_welfare)]
    LimitExceeded(Box<OracleResult>),
}

impl OracleError {
    /// The lower-bound result of a [`OracleError::LimitExceeded`].
    pub fn into_lower_bound(self) -> Option<OracleResult> {
        match self {
            OracleError::LimitExceeded(r) => Some(*r),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{bid, instance_x};
    use crate::model::{validate_schedule, welfare, Instance};
    use crate::workload::{generate, linear_slack, GeneratorSpec, PriceBasis, PriceModel};
    use proptest::prelude::*;

    fn small_spec() -> impl Strategy<Value = GeneratorSpec> {
        (1usize..=5, 1usize..=3, 1usize..=3, 5u32..=12, 1u32..=4, 100u32..=800, any::<bool>(), any::<u64>()).prop_map(
            |(users, m, b, horizon, longest, dhi, flat, seed)| GeneratorSpec {
                num_users: users,
                num_resources: m,
                num_options: b,
                horizon,
                slots_required: (1, longest.min(horizon - 1)),
                demand: (50, dhi),
                price: PriceModel {
                    basis: if flat { PriceBasis::Flat } else { PriceBasis::Footprint },
                    ..PriceModel::default()
                },
                slack: linear_slack(b, 0, 2),
                seed,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn every_method_matches_exhaustive(spec in small_spec()) {
            let inst = generate(&spec).unwrap();
            let reference = solve_exhaustive(&inst).optimum_welfare;
            for method in [Method::Auto, Method::BranchAndBound, Method::Timeline] {
                let r = solve_with(&inst, &OracleLimits::default(), method).unwrap();
                prop_assert_eq!(r.optimum_welfare, reference, "{:?}", method);
                prop_assert!(validate_schedule(&inst, &r.witness).is_empty());
                prop_assert_eq!(welfare(&inst, &r.witness), reference);
            }
        }
    }

    fn exact(inst: &Instance) -> OracleResult {
        solve_exact(inst, &OracleLimits::default()).unwrap()
    }

    #[test]
    fn instance_x_optimum_is_15() {
        let inst = instance_x();
        for r in [solve_exhaustive(&inst), exact(&inst)] {
            assert_eq!(r.optimum_welfare, 15);
            assert_eq!(r.status, OracleStatus::Optimal);
            assert!(validate_schedule(&inst, &r.witness).is_empty());
            assert_eq!(welfare(&inst, &r.witness), 15);
        }
    }

    #[test]
    fn empty_instance() {
        let inst = Instance::new(3, 2, vec![]);
        assert_eq!(exact(&inst).optimum_welfare, 0);
        assert_eq!(solve_exhaustive(&inst).optimum_welfare, 0);
    }

    #[test]
    fn single_user_gets_best_price() {
        let inst = Instance::new(9, 2, vec![bid(0, 2, 3, &[700, 100], &[(5, 30), (9, 4)])]);
        assert_eq!(exact(&inst).optimum_welfare, 30);
        assert_eq!(solve_exhaustive(&inst).optimum_welfare, 30);
    }

    #[test]
    fn compatible_users_sum_their_best_prices() {
        let inst = Instance::new(
            8,
            2,
            vec![
                bid(0, 1, 3, &[300, 300], &[(4, 9), (8, 1)]),
                bid(1, 2, 2, &[300, 300], &[(3, 7)]),
                bid(2, 1, 4, &[300, 300], &[(6, 11), (7, 10)]),
            ],
        );
        assert_eq!(exact(&inst).optimum_welfare, 27);
        assert_eq!(solve_exhaustive(&inst).optimum_welfare, 27);
    }

    #[test]
    fn exclusive_users_yield_the_best_single_price() {
        let inst = Instance::new(
            6,
            1,
            vec![
                bid(0, 2, 3, &[600], &[(4, 8)]),
                bid(1, 2, 3, &[600], &[(4, 13)]),
                bid(2, 2, 3, &[600], &[(4, 5)]),
            ],
        );
        assert_eq!(exact(&inst).optimum_welfare, 13);
        assert_eq!(solve_exhaustive(&inst).optimum_welfare, 13);
    }

    #[test]
    fn too_many_users() {
        let bids = (0..9).map(|i| bid(i, 1, 1, &[10], &[(1, 1)])).collect();
        let inst = Instance::new(1, 1, bids);
        assert_eq!(
            solve_exact(&inst, &OracleLimits::default()),
            Err(OracleError::TooManyUsers { users: 9, limit: 8 })
        );
    }

    #[test]
    fn node_limit_reports_a_lower_bound() {
        let bids = (0..8)
            .map(|i| bid(i, 1, 3, &[400 + 10 * i as u32], &[(4, 10 + i as u64), (6, 5)]))
            .collect();
        let inst = Instance::new(6, 1, bids);
        let limits = OracleLimits { max_nodes: 0, ..OracleLimits::default() };
        let err = solve_exact(&inst, &limits).unwrap_err();
        let lb = err.into_lower_bound().expect("limit error");
        assert_eq!(lb.status, OracleStatus::LimitExceeded);
        assert!(validate_schedule(&inst, &lb.witness).is_empty());
        assert!(lb.optimum_welfare <= exact(&inst).optimum_welfare);
    }
}
