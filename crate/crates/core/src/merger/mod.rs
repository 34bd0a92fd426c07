//! Gluing a host structure to a guest along a set of indiscernibles.

pub mod equivalence;
pub mod indiscernibles;
pub mod merge;
pub mod projection;

pub use equivalence::{merger_equivalence, MergerEquivalence, MergerSide, TaggedGuestFamily};
pub use indiscernibles::{
    check_absolute_indiscernibles, fiber_equalizing_chain, predicate_members, Fate, IndiscernibleReport,
    PermutationOutcome, StageSummary,
};
pub use merge::{guest_restriction, host_restriction, merge_structures, Merger, MergerSpec};
pub use projection::{
    build_projection_generic, check_projection, enumerate_projection, fiber_sizes, projection_signature,
    projection_with_fibers,
};
