use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid process: {0}")]
    InvalidProcess(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by running out of a numerical budget
    /// (horizon or term count) rather than by bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::HorizonExceeded(_) | Error::BudgetExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
