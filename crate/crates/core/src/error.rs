//! Crate-wide error type.

/// Errors produced by the DSP, feature, network and synthesis layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    /// Malformed byte stream (feature dump, model file, feature matrix).
    /// `offset` is the byte position the problem was detected at.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    Checksum { stored: u64, computed: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("synthesis diverged at sample {sample}")]
    Divergence { sample: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn format(offset: u64, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
