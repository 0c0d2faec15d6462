use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("negative exponent at position {position}")]
    NegativeExponent { position: usize },

    #[error("domain truncation: {0}")]
    DomainTruncation(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unstable time step dt = {dt}; try dt <= {suggested}")]
    Stability { dt: f64, suggested: f64 },

    #[error("unsupported hamiltonian: {0}")]
    UnsupportedHamiltonian(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
