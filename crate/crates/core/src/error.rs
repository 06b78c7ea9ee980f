// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input data that no structure is allowed to hold (NaN coordinates and similar).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: size {size} bytes is not a multiple of the {record}-byte record")]
    Misaligned { path: PathBuf, size: u64, record: u64 },

    #[error("{path}: file is {size} bytes, shorter than one {record}-byte record")]
    Truncated { path: PathBuf, size: u64, record: u64 },

    #[error("point count mismatch: {left} has {left_len} points, {right} has {right_len}")]
    CountMismatch {
        left: String,
        left_len: usize,
        right: String,
        right_len: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// An internal invariant did not hold. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
