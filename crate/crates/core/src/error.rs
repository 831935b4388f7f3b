use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too large: {what} needs {needed} but the budget is {budget}")]
    TooLarge {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("incomplete table: no value for {0}")]
    IncompleteTable(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
