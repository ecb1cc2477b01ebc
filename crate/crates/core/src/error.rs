use std::path::PathBuf;

use thiserror::Error;

use crate::money::Cents;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The input does not match the file schema.
    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    /// The input parsed but breaks a model invariant.
    #[error("validation error at {location}: {message}")]
    Validation { location: String, message: String },

    /// Mismatched shapes between cooperating values (vector lengths, etc.).
    #[error("structural error: {0}")]
    Structural(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The mandatory purchases plus cheapest alternatives exceed the budget.
    #[error("instance is infeasible: lower budget bounds exceed the remaining budget by {deficit}")]
    Infeasible { deficit: Cents },

    #[error("search space too large for exhaustive enumeration: about {estimate:.3e} candidates (limit {limit:.0e})")]
    OracleTooLarge { estimate: f64, limit: f64 },
}

impl Error {
    pub(crate) fn validation(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            location: location.into(),
            message: message.into(),
        }
    }
}
