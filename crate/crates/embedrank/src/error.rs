use thiserror::Error;

/// Errors produced by the embedrank library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file: bad magic, inconsistent header, truncated payload.
    #[error("format error: {0}")]
    Format(String),

    /// Invalid data content (NaN/Inf components, zero-norm vectors, empty sets).
    #[error("data error: {0}")]
    Data(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Dimension / length mismatch between operands.
    #[error("shape error: {0}")]
    Shape(String),

    /// Numerical failure: divergence, NaN during optimization, non-convergence.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
