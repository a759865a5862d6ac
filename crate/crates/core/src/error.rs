use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("node count {n} exceeds supported maximum {max}")]
    TooManyNodes { n: usize, max: usize },
    #[error("action {0} is not available in this state")]
    InvalidAction(usize),
    #[error("infeasible state: {0}")]
    InfeasibleState(String),
    #[error("instance too large for exact solving: n={n} > limit {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("cannot parse state text: {0}")]
    StateParse(String),
    #[error("cannot parse table key: {0}")]
    KeyParse(String),
    #[error("unsupported file format version {0}")]
    FileVersion(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
