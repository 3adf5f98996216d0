//! Secretary-problem tooling for non-uniform random orders.
//!
//! The crate covers Mallows, Luce, inverse-Luce and p-shifted laws on `S_n`:
//! probability mass functions, exact samplers, the threshold rule
//! `S(n, M)` with brute-force and closed-form success probabilities,
//! Monte Carlo estimation, the odds algorithm, and large-`n` optimal
//! thresholds.
//!
//! ```
//! use stopsmith::{optimize_threshold, ExactFamily};
//!
//! let best = optimize_threshold(&ExactFamily::Classical, 4).unwrap();
//! assert_eq!(best.m, 1);
//! assert!((best.value - 11.0 / 24.0).abs() < 1e-15);
//! ```

pub mod asymptotics;
pub mod closed_forms;
pub mod error;
mod fenwick;
pub mod models;
pub mod monte_carlo;
pub mod perm;
pub mod sampling;
pub mod secretary;
pub mod verify;
pub mod weights;

pub use asymptotics::{
    critical_window_fraction, fixed_q_optimum, intermediate_regime, limit_curve, solve_regime,
    sukhatme_optimal_fraction, tail_sum, AsymptoticRegime, LimitCurve, LimitRecord, LimitResult, Sign,
    SukhatmeKind, Threshold,
};
pub use closed_forms::{
    classical_exact, luce_inv_down_exact, mallows_down_exact, mallows_up_exact, optimize_threshold, ExactFamily,
    Optimum,
};
pub use error::{Error, Result};
pub use models::{enumerate_support, Family, ModelSpec};
pub use monte_carlo::{monte_carlo_success, EstimateRecord, MonteCarloEstimate};
pub use perm::{all_permutations, reduce_sequence, LehmerCode, Permutation, RankDirection};
pub use sampling::stream_rng;
pub use secretary::{
    bruss_odds_threshold, exact_success_by_enumeration, independence_defect, record_joint_law,
    run_threshold_strategy, RecordJointLaw, Selection,
};
pub use verify::{run_suite, CheckOutcome, VerifyLevel};
pub use weights::WeightVector;
