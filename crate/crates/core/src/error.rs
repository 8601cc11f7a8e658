use thiserror::Error;

/// Every failure the library reports. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Validity(String),
    #[error("size guard: {0}")]
    Size(String),
    #[error("numerical contract violated: {0}")]
    Contract(String),
    #[error("conditioning violated: {0}")]
    Conditioning(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
