use thiserror::Error;

/// Failure classes surfaced by the library.
///
/// [`Error::exit_code`] maps each class onto the CLI contract: input that
/// fails to parse or validate exits with 1, violated preconditions with 2 and
/// exhausted budgets with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed [{invariant}]: {detail}")]
    Invalid { invariant: &'static str, detail: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precondition violated [{invariant}]: {detail}")]
    Precondition { invariant: &'static str, detail: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid { invariant, detail: detail.into() }
    }

    pub fn precondition(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition { invariant, detail: detail.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Invalid { .. } | Error::Io(_) => 1,
            Error::DimensionMismatch { .. } | Error::Precondition { .. } | Error::Numerical(_) => 2,
            Error::Budget(_) => 3,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
