use std::path::PathBuf;

use thiserror::Error;

use crate::counterfactual::CexResult;
use crate::semantics::StrengthMap;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The document is not well-formed JSON.
    #[error("syntax error: {0}")]
    Syntax(String),

    /// The document is JSON but violates the QBAF schema or its invariants.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown argument `{0}`")]
    UnknownArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Fixed-point iteration exhausted its budget. Carries the last iterate.
    #[error(
        "strengths did not converge after {} iterations (max residual {:.3e})",
        .last.iterations_used,
        .last.max_residual
    )]
    NonConvergence { last: Box<StrengthMap> },

    /// A solver sweep could not move the topic strength any further.
    #[error("desired strength is unreachable: {reason}")]
    Unreachable {
        reason: String,
        best: Box<CexResult>,
    },

    #[error("sweep limit of {limit} reached without a valid counterfactual")]
    SweepLimit { limit: usize, best: Box<CexResult> },

    #[error("{args} arguments exceed the exact Shapley limit of {limit}")]
    TooLarge { args: usize, limit: usize },

    #[error("experiment requests zero instances")]
    EmptyExperiment,

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Best-so-far solver output, when the error carries one.
    pub fn best_effort(&self) -> Option<&CexResult> {
        match self {
            Error::Unreachable { best, .. } | Error::SweepLimit { best, .. } => Some(best),
            _ => None,
        }
    }
}
