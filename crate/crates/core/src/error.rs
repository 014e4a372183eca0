use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("particle number must be a positive integer, got {0}")]
    InvalidParticleNumber(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("probability vector is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("sampling requires an exact probability vector")]
    NotExact,
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("input is empty")]
    EmptyInput,
    #[error("length mismatch: {0} true phases vs {1} estimates")]
    LengthMismatch(usize, usize),
    #[error("phase grid needs at least {min} points, got {actual}")]
    GridTooSmall { min: usize, actual: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch}: {loss}")]
    NonFiniteLoss { epoch: usize, loss: f64 },
    #[error("invalid decoder layout: {0}")]
    InvalidLayout(String),
    #[error("PCA needs at least 3 rows, got {0}")]
    TooFewRows(usize),
    #[error("snapshot hook failed: {0}")]
    Snapshot(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
