//! Population limit maximum regret of plug-in prediction for binary
//! treatment choice.
//!
//! A planner chooses between treatments A and B for every member of a
//! population with a finite covariate space. Treatment B is optimal for
//! covariate group `x` exactly when the conditional event probability
//! `p_x = P(y = 1 | x)` exceeds the group-specific cutoff `1 - U_xB`.
//! Plug-in prediction estimates `p_x` with some (typically misspecified)
//! model and applies a decision threshold `t_x` to the estimate. This
//! crate computes the worst-case (maximum) regret of such rules in the
//! sampling limit, where the estimate becomes a deterministic function of
//! the true state of nature:
//!
//! ```text
//! MR = max_s  Σ_x P(x) · |(1 - U_xB) - p_sx| · 1[decision(φ_sx, t_x) ≠ optimal(p_sx)]
//! ```
//!
//! Grid states, covariate weights, welfare values, thresholds, and all
//! closed-form results are exact rationals; regret values are therefore
//! exact wherever the predictor itself is rational (correct, shifted,
//! marginal-mean, linear least squares, linear interpolation). Logistic
//! predictors produce `f64` predictions; only the error indicator touches
//! floating point on that path, so regret values stay exact conditional
//! on the (tolerance-guarded) float decisions.
//!
//! Modules:
//! - [`problem`]: the decision problem, decision rule, and per-state regret
//! - [`predictors`]: limit predictors, including least-squares fits
//! - [`search`]: state grids, exhaustive maximum regret, threshold search
//! - [`closed_form`]: analytical maximum-regret results and bounds
//! - [`montecarlo`]: finite-sample expected regret by simulation
//!
//! All computation is pure: values are immutable after construction and
//! every operation is safe to call concurrently.

pub mod closed_form;
pub mod error;
pub mod montecarlo;
pub mod predictors;
pub mod problem;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use problem::{
    decide, decide_with_boundary, error_indicator, marginal_mean, optimal_treatment, state_regret,
    state_regret_report, GeneralWelfare, Problem, RegretReport, State, StateRegret, Treatment,
    ThresholdEntry, ThresholdPolicy,
};
pub use scalar::{parse_rational, Scalar};

/// Exact rational scalar used throughout the crate.
pub type Rat = num_rational::BigRational;

/// General welfare table over exact rationals.
pub type RatWelfare = GeneralWelfare<Rat>;

/// General welfare table over double-precision floats.
pub type F64Welfare = GeneralWelfare<f64>;

/// Convenience constructor for small rational constants.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}
