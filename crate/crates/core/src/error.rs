use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid or run configuration (bad dimensions, odd sizes, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A scalar argument outside its mathematical domain (t <= 0, c <= 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Geometric data that makes the assembly formulas singular (pi vanishing).
    #[error("singular data: {0}")]
    SingularData(String),

    /// No constant supersolution exists because (A4) fails.
    #[error("no supersolution: {0}")]
    NoSupersolution(String),

    /// A precondition of the solver pipeline is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iteration exhausted its budget without meeting its tolerance.
    #[error("no convergence after {iters} iterations: {context} (last residual {residual:e})")]
    NonConvergence {
        context: String,
        iters: usize,
        residual: f64,
    },

    /// A certified quantity failed its own post-check.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
