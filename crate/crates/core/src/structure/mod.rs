//! Finite multi-sorted structures and the searches over them.

use thiserror::Error;

use crate::limits::GuardExceeded;

pub mod closure;
pub mod ef;
pub mod embedding;
pub mod format;
pub mod model;
pub mod search;
pub mod signature;

pub use closure::substructure_generated_by;
pub use ef::{ef_game, EfOutcome, Move, Player, Round, Side};
pub use embedding::{Embedding, EmbeddingViolation};
pub use format::{structure_from_json, structure_to_json, StructureFile};
pub use model::{ElementId, Structure, Tuple};
pub use search::{
    all_embeddings, automorphism_extending, automorphisms, find_embedding, isomorphic, isomorphic_extending,
    search_maps, MapKind,
};
pub use signature::{RelationDecl, Signature, ANY_SORT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("element id {0} used twice")]
    DuplicateElement(ElementId),
    #[error("bad tuple {relation}{tuple:?}: {reason}")]
    BadTuple {
        relation: String,
        tuple: Tuple,
        reason: String,
    },
    #[error("bad order: {0}")]
    BadOrder(String),
    #[error("bad signature: {0}")]
    BadSignature(String),
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("malformed structure file: {0}")]
    Format(String),
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
}
