use thiserror::Error;

/// Failure classes shared by every operation in the crate.
///
/// The classes map one-to-one onto the command-line exit codes: validation
/// problems are the caller's fault, numerical and resource failures are not.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Process exit code for this failure: 1 for validation, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 1,
            Error::Numerical(_) | Error::Resource(_) => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
