use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two operands do not have compatible shapes.
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },
    /// A scalar or structural argument is outside its allowed domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The input carries no signal to work with (all-zero block or channel).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// The offset cannot be identified from the given waveform / channel.
    #[error("offset not identifiable: {0}")]
    NotIdentifiable(String),
    /// An experiment description failed validation.
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        key: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn mismatch(
        context: &'static str,
        expected: impl ToString,
        found: impl ToString,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            key: key.into(),
            message: message.into(),
        }
    }
}
