use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive off-diagonal coefficient a_{index} = {value}")]
    NonPositiveCoefficient { index: usize, value: f64 },

    #[error("non-finite coefficient at index {index}")]
    NonFiniteCoefficient { index: usize },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigenvalues not converged at truncation m = {m} (largest shift {shift:e})")]
    NotConverged { m: usize, shift: f64 },

    #[error("evaluation point ({re}, {im}) is on a pole of M")]
    PoleHit { re: f64, im: f64 },

    #[error("quadrature failed: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadFailure { estimate: f64, tolerance: f64 },

    #[error("divergence detected in {quantity}: {detail}")]
    DivergenceDetected { quantity: String, detail: String },

    #[error("rank {rank} exceeds the rational-mode limit {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
