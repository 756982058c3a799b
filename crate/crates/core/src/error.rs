use thiserror::Error;

/// Errors raised by the capsym numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A request that would exceed a fixed memory guard.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a singular point of a map (e.g. the projection pole).
    #[error("singular point: {0}")]
    Singularity(String),

    /// Input data does not satisfy the operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative solver ran out of iterations.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A configuration the solvers deliberately do not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
