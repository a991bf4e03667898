use thiserror::Error;

use crate::normal_form::Coalition;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid coalition {0}: must be a nonempty proper subset of the players")]
    InvalidCoalition(Coalition),

    #[error("LP solver failed: {0}")]
    Solver(String),

    #[error("update failed at state {state}: {source}")]
    StateUpdate {
        state: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("coalition {coalition} solve failed: {source}")]
    CoalitionSolve {
        coalition: Coalition,
        #[source]
        source: Box<Error>,
    },

    #[error("grid spec: {0}")]
    GridSpec(String),

    #[error("compiled game too large: {entries} transition entries exceeds cap {cap}")]
    TooLarge { entries: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidCoalition(_)
            | Error::GridSpec(_)
            | Error::TooLarge { .. }
            | Error::Parse(_)
            | Error::Io(_) => true,
            Error::Solver(_) => false,
            Error::StateUpdate { source, .. } | Error::CoalitionSolve { source, .. } => {
                source.is_input_error()
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
