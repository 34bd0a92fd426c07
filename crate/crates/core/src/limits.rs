use thiserror::Error;

/// Size guards for every exhaustive search in the crate.
///
/// Guards are plain configuration; the defaults keep every documented
/// example well under a second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Backtracking nodes allowed in one map search.
    pub max_nodes: u64,
    /// Largest structure whose full automorphism list may be requested.
    pub automorphism_elements: usize,
    /// Largest substructure a closure may grow to.
    pub closure_size: usize,
    /// Positions (injective move sequences, summed over both structures) an EF solve may visit.
    pub ef_positions: u64,
    /// Largest tree (nodes plus branches) that may be built.
    pub tree_nodes: usize,
    /// Up to this many indiscernibles every permutation is checked; above it, a seeded sample.
    pub exhaustive_permutations: usize,
    pub permutation_samples: usize,
    /// Items a certificate report may contain before the search is refused.
    pub certificate_items: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: 20_000_000,
            automorphism_elements: 12,
            closure_size: 10_000,
            ef_positions: 50_000_000,
            tree_nodes: 100_000,
            exhaustive_permutations: 6,
            permutation_samples: 720,
            certificate_items: 200_000,
        }
    }
}

impl Limits {
    /// Scales every guard to a single size knob, as the command line exposes it.
    pub fn with_size_guard(mut self, guard: u64) -> Self {
        self.max_nodes = guard;
        self.ef_positions = guard;
        self.closure_size = guard as usize;
        self.tree_nodes = guard as usize;
        self.certificate_items = guard as usize;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("search refused: {what} exceeds the guard of {limit}")]
pub struct GuardExceeded {
    pub what: &'static str,
    pub limit: u64,
}
