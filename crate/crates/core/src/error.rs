use thiserror::Error;

use crate::limits::GuardExceeded;
use crate::structure::StructureError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("wrong signature: {0}")]
    WrongSignature(String),
    #[error("{class} membership fails: {detail}")]
    NotInClass { class: String, detail: String },
    #[error("invalid embedding: {0}")]
    BadEmbedding(String),
    #[error("not a good pair: {0}")]
    NotGoodPair(String),
    #[error("insufficient X: {have} elements cannot cover {need} targets")]
    InsufficientX { have: usize, need: usize },
    #[error("{0}")]
    Invalid(String),
}

impl From<GuardExceeded> for Error {
    fn from(g: GuardExceeded) -> Self {
        Error::Structure(StructureError::Guard(g))
    }
}

impl Error {
    /// True when the failure is a refused search rather than a bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Structure(StructureError::Guard(_)))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
