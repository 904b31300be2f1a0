use thiserror::Error;

/// Errors raised by the solvers and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("objective diverged at iteration {iteration}: non-finite value or gradient")]
    Divergence { iteration: usize },

    /// Line search could not decrease the objective. Carries the last accepted
    /// iterate so callers can inspect or accept it.
    #[error("line search stalled at iteration {iteration} (gradient norm {grad_norm:.3e})")]
    Stall {
        iteration: usize,
        grad_norm: f64,
        value: f64,
        x: Vec<f64>,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("table error: {0}")]
    Table(String),

    #[error("no seed converged: {0}")]
    NoMinimizer(String),

    #[error("query outside interpolation range: {0}")]
    Extension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
