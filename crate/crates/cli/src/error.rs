use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad flags or argument values. Exit code 1.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("insufficient verified events: {found} survived the {window_ms} ms window, at least 2 are needed")]
    InsufficientVerified { found: usize, window_ms: u64 },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Data(#[from] chainwatch_core::Error),
}

impl HarnessError {
    /// 1 for usage errors, 2 for everything caused by the input data.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn file(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        HarnessError::File {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
