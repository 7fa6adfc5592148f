use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid threshold {0}: must be a nonnegative finite number")]
    InvalidThreshold(f64),
    #[error("invalid step size {0}: must be positive and finite")]
    InvalidStep(f64),
    #[error("invalid smoothing constant {0}: must be positive and finite")]
    InvalidSmoothing(f64),
    #[error("invalid batch: {0}")]
    InvalidBatch(String),
    #[error("component index {index} out of range for {n} components")]
    ComponentIndex { index: usize, n: usize },
    #[error("problem does not provide analytic gradients")]
    UnavailableGradient,
    #[error("problem is not strongly convex (mu = {0})")]
    NotStronglyConvex(f64),
    #[error("invalid conditioning target {0}: must be >= 1")]
    InvalidConditioning(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("iterate diverged at iteration {iteration}")]
    Diverged { iteration: u64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("reference solver failed: {0}")]
    ReferenceFailure(String),
    #[error("residual {residual:e} is below the reference tolerance band; reference optimum is not accurate enough")]
    ReferenceQuality { residual: f64 },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
