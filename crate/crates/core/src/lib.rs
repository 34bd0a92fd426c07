//! Finite multi-sorted structures, the knight amalgamation classes, generic
//! chains, mergers and the derived tree and meet constructions.

pub mod class;
pub mod combinatorics;
pub mod derived;
pub mod error;
pub mod generic;
pub mod knight;
pub mod limits;
pub mod merger;
pub mod structure;
pub mod verdict;

pub use error::{Error, Result};
pub use limits::{GuardExceeded, Limits};
pub use verdict::{Verdict, Violation};
