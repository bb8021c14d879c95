use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("initial state preparation did not converge: infidelity {infidelity:.3e} after {steps} steps")]
    Preparation { infidelity: f64, steps: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
