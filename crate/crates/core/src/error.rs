// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular selection: {0}")]
    SingularSelection(String),
    #[error("sampling failure: {0}")]
    SamplingFailure(String),
    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("trajectory not replayable: {0}")]
    Replay(String),
    #[error("unsupported chain: {0}")]
    UnsupportedChain(String),
    #[error("out of bounds: {0}")]
    Bounds(String),
    #[error("fit failure: {0}")]
    FitFailure(String),
    #[error("inconsistent budget: {0}")]
    InconsistentBudget(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
