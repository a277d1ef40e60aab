use thiserror::Error;

/// Errors raised by the change-point toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("circulant embedding is not positive semi-definite: eigenvalue {eigenvalue:e} at index {index}")]
    EmbeddingNotPsd { index: usize, eigenvalue: f64 },

    #[error("inconsistent normalization: {0}")]
    InconsistentNormalization(String),

    #[error("unsupported Hermite order {0} (supported: 0..=10)")]
    UnsupportedOrder(usize),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("missing quantile for key {0}")]
    MissingQuantile(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
