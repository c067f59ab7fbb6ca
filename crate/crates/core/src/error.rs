//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building or evaluating a problem.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A welfare inequality required by the decision model is violated.
    #[error("welfare precondition violated: {0}")]
    WelfareInequality(&'static str),

    /// Problem construction failed an invariant check.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// A covariate label is not part of the problem.
    #[error("unknown covariate label {0}")]
    UnknownCovariate(i64),

    /// A vector does not have one entry per covariate.
    #[error("length mismatch: expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    /// A probability vector or grid value is outside [0, 1].
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A state or threshold grid failed validation.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A predictor specification is inconsistent with the problem.
    #[error("invalid predictor spec: {0}")]
    InvalidSpec(String),

    /// The regression design has no variation.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// The interpolating model's parameter count does not equal K.
    #[error("interpolating model has {params} parameters but K = {k}")]
    ArityMismatch { params: usize, k: usize },

    /// No multistart run of the nonlinear solver met its tolerances.
    #[error("nonlinear least squares did not converge: {details} (best found a={a}, b={b}, mse={mse})")]
    NonConvergence {
        a: f64,
        b: f64,
        mse: f64,
        details: String,
    },

    /// A predictor failed while scanning a state grid.
    #[error("predictor failed at state ({state}): {source}")]
    PredictorAtState {
        state: String,
        #[source]
        source: Box<Error>,
    },

    /// The per-covariate threshold product is larger than the configured cap.
    #[error("threshold policy count {count} exceeds cap {cap}")]
    PolicyBudget { count: u128, cap: u128 },

    /// A Monte Carlo run would exceed its draw budget.
    #[error("monte carlo cost {cost} draws exceeds budget {budget}")]
    McBudget { cost: u128, budget: u128 },

    /// A forced-action threshold was passed where a numeric one is required.
    #[error("forced threshold not allowed: {0}")]
    ForcedThreshold(&'static str),

    /// A sample-based estimator could not be computed.
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// A rational literal could not be parsed.
    #[error("invalid rational {input:?}: {reason}")]
    ParseRational { input: String, reason: String },
}

impl Error {
    /// Attach the state a predictor failed on while scanning a grid.
    pub(crate) fn at_state(self, state: &crate::problem::State) -> Error {
        Error::PredictorAtState {
            state: state.to_string(),
            source: Box::new(self),
        }
    }
}
