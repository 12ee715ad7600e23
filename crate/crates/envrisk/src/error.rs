use thiserror::Error;

/// Errors surfaced by the library. Solver non-convergence is *not* an error:
/// fitters report it through `FitResult::converged` so a sweep can keep going.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("margin loss requires labels in {{-1, +1}}, got {0}")]
    InvalidLabel(f64),
    #[error("{0} requires a convex loss")]
    NonConvex(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("directions are rank deficient in the covariance geometry")]
    RankDeficient,
    #[error("infeasible fiber: ball radius {radius} is below the parallel-part norm {parallel_norm}")]
    InfeasibleFiber { radius: f64, parallel_norm: f64 },
    #[error("unsupported model for this oracle: {0}")]
    UnsupportedModel(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
