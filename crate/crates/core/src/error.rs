use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::field::Point;
use crate::forms::FormError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("coframe is singular at {point:?} (det = {det:e})")]
    Singular { point: Point, det: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// Well-formed file with contents that do not describe a valid input.
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
