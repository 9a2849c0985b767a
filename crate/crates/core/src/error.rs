use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value object was built from out-of-range parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A caller broke an operation's input contract (length mismatch and similar).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A function handed to the Dirichlet space does not vanish at the boundary.
    #[error("boundary violation: |f({point})| = {value:e} exceeds {tol:e}")]
    Boundary { point: f64, value: f64, tol: f64 },

    /// The nonlocal denominator collapsed.
    #[error("degenerate denominator: integral of f(u) = {0:e}")]
    DegenerateDenominator(f64),

    /// Picard iteration did not reach the tolerance.
    #[error("fixed-point iteration did not converge at step {step} after {iterations} iterations (residuals: {residuals:?})")]
    NonConvergence {
        step: usize,
        iterations: usize,
        residuals: Vec<f64>,
    },

    /// A conductivity or initial datum failed its hypothesis check.
    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    /// Numerical machinery that should not fail did (root finder, factorization, oracle).
    #[error("internal numerical failure: {0}")]
    Internal(String),

    /// Configuration text could not be interpreted.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
