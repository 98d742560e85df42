use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of vectors, matrices or sequences disagree, or a dimension is zero.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An observation index does not exist in the alphabet.
    #[error("observation {index} at position {position} is outside the alphabet of size {size}")]
    Alphabet {
        index: usize,
        position: usize,
        size: usize,
    },

    #[error("{what} is not a probability distribution: {detail}")]
    NotStochastic { what: String, detail: String },

    /// The observations cannot be produced by the model at all.
    #[error("observation sequence has zero probability under the model (first impossible step {step})")]
    ZeroLikelihood { step: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("duplicate {kind} `{value}`")]
    Duplicate { kind: &'static str, value: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid chain spec: {0}")]
    Spec(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
