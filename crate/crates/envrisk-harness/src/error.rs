use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv parse error: {0}")]
    Csv(String),
    #[error(transparent)]
    Core(#[from] envrisk::Error),
    #[error("solvers failed to converge on {failed} of {total} rows")]
    NonConvergence { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for widespread
    /// solver non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::NonConvergence { .. } => 3,
            _ => 1,
        }
    }
}
