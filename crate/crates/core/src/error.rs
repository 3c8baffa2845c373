use thiserror::Error;

/// Errors produced by the solver, the MPC layer and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("gradient term is zero; use the box-center shortcut")]
    ZeroGradient,

    #[error("invalid tolerance eps={eps} for n={n}: need 0 < eps < 2n")]
    InvalidTolerance { n: usize, eps: f64 },

    #[error("numerical breakdown at iteration {iteration}: {reason}")]
    NumericalBreakdown { iteration: usize, reason: String },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("dimension {n} too large for enumeration (max {max})")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("iteration limit {0} reached")]
    IterationLimit(usize),

    #[error("closed-loop step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips any closed-loop step context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
