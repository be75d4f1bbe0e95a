use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes (or vector lengths) do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A model, topology, or training configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Manifest, feature-table, or sampling problems.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed or truncated checkpoint file.
    #[error("checkpoint error at byte {offset}: {message}")]
    Checkpoint { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
