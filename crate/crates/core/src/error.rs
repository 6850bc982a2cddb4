use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration or argument violates a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The simulation sample rate cannot represent the requested frequencies.
    #[error("sample rate {sample_rate} Hz is below the required {required} Hz")]
    SampleRateTooLow { sample_rate: f64, required: f64 },

    /// An operation needed at least one sample.
    #[error("signal is empty")]
    EmptySignal,

    /// A sample was NaN or infinite.
    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    /// A line-code decoder met a chip sequence the code cannot produce.
    #[error("{code} decode error at chip {position}: {reason}")]
    Decode {
        code: &'static str,
        position: usize,
        reason: String,
    },

    /// Symbol timing could not be established.
    #[error("symbol timing unresolvable: {0}")]
    Timing(String),

    /// A malformed serialized signal or record.
    #[error("format error: {0}")]
    Format(String),

    /// An internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks `cond` and returns an [`Error::InvalidParameter`] otherwise.
pub(crate) fn ensure(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason))
    }
}
