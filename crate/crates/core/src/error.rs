use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The log-domain path was asked to transform a distance equal to 1.
    #[error("saturated distance: the log-domain transform is only defined below 1")]
    SaturatedDistance,

    #[error("edit rejected on edge ({j}, {i}): {reason}")]
    EditRejected { j: usize, i: usize, reason: String },

    #[error("graph is not symmetric: edge ({j}, {i}) has no mirror of equal weight")]
    Asymmetric { j: usize, i: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("saturated log: elemental distance reached 1 at sample y = {y}")]
    SaturatedLog { y: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
