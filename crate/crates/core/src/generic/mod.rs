//! Chains, the fair scheduler, certificates, chain amalgamation and end extension.

pub mod certificates;
pub mod chain;
pub mod chain_amalgam;
pub mod end_extension;
pub mod scheduler;

pub use certificates::{
    extend_partial_map, homogeneity_check, richness_certificate, HomogeneityReport, RichnessReport,
};
pub use chain::{Chain, LedgerEntry, Operation, StepParameters};
pub use chain_amalgam::{chain_amalgam_step, chain_amalgamate, extend_top, ChainAmalgamInfo};
pub use end_extension::{end_extend, end_extend_step, verify_end_extension_necessity, ExtensionKind, NecessityVerdict};
pub use scheduler::{build_generic_chain, ScheduleBudget};
