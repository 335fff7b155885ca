use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (bad dimensions, out-of-range hyperparameters).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("simulation diverged at t = {time}: {detail}")]
    Diverged { time: f64, detail: String },

    #[error("non-finite gradient, update aborted: {0}")]
    NonFiniteGradient(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {} at byte {offset}: {detail}", path.display())]
    Format { path: PathBuf, offset: u64, detail: String },

    #[error("invalid configuration for `{key}`: {detail}")]
    Config { key: String, detail: String },

    #[error("unresolved template placeholders: {}", names.join(", "))]
    Template { names: Vec<String> },

    #[error("failed to spawn solver `{program}`: {detail}")]
    Spawn { program: String, detail: String },

    #[error("solver exited with {status}; output tail:\n{tail}")]
    Solver { status: String, tail: String },

    #[error("solver timed out after {limit:?}; output tail:\n{tail}")]
    Timeout { limit: Duration, tail: String },

    #[error("environment {env} failed in episode {episode}: {source}")]
    Environment {
        env: usize,
        episode: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, offset: u64, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            offset,
            detail: detail.into(),
        }
    }
}
