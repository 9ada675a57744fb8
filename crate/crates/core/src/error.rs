//! Crate-wide error type.
//!
//! Errors fall into two broad families that callers (notably the CLI) treat
//! differently:
//!
//! * input/validation problems — malformed files, bad dimensions, violated
//!   preconditions ([`Error::is_constraint`] returns `false`);
//! * parameter-constraint failures the caller can fix by adjusting knobs,
//!   e.g. asking for more attention heads than masks allow
//!   ([`Error::is_constraint`] returns `true`).

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("node {node} not found in tree")]
    NodeNotFound { node: usize },

    #[error("operator precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch in {stage}: {msg}")]
    DimMismatch { stage: String, msg: String },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("matrix is not symmetric: |a[{i},{j}] - a[{j},{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("constraint failure: {0}")]
    Constraint(String),

    #[error("non-finite value produced in {stage}")]
    NonFinite { stage: String },

    #[error("invariant violated in {stage}: {msg}")]
    Invariant { stage: String, msg: String },
}

impl Error {
    /// Wrap an i/o error with the path it occurred on.
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Build a parse error for `path` at 1-based `line`.
    pub fn parse(path: impl AsRef<std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            msg: msg.into(),
        }
    }

    /// True for parameter-constraint failures (the CLI maps these to a
    /// dedicated exit code so scripts can distinguish "fix your flags" from
    /// "fix your input files").
    pub fn is_constraint(&self) -> bool {
        matches!(self, Error::Constraint(_))
    }
}
