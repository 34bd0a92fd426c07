use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Checkers, amalgamations, chain builds and certificates over finite structures.
#[derive(Debug, Parser)]
#[command(name = "forge", version, about)]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// One knob for every search guard (map nodes, EF positions, closure, tree and certificate sizes).
    #[arg(long, global = true, env = "FORGE_SIZE_GUARD", value_parser = clap::value_parser!(u64).range(1..))]
    pub size_guard: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a class checker on a structure file.
    Check {
        /// knight, knight-u, knight-q, projection or meet (class names k0, k1, k0-prime work too).
        #[arg(long)]
        preset: String,
        file: PathBuf,
        /// Smallest fiber accepted by the projection checker.
        #[arg(long, default_value_t = 1)]
        min_fiber: usize,
    },
    /// Disjoint amalgam of B and C over A.
    Amalgamate {
        a: PathBuf,
        b: PathBuf,
        c: PathBuf,
        #[arg(long, default_value = "k0")]
        class: String,
        /// Embedding A -> B as a JSON object; identity on A by default.
        #[arg(long)]
        eab: Option<PathBuf>,
        /// Embedding A -> C as a JSON object; identity on A by default.
        #[arg(long)]
        eac: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Build a generic chain with a seeded fair scheduler.
    Generic {
        #[arg(long, default_value = "k0")]
        class: String,
        /// First stage; the empty structure of the class by default.
        #[arg(long)]
        seed_structure: Option<PathBuf>,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        max_guest_size: u64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        repetitions: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Least serving stage for every good pair and embedding.
    Richness {
        chain: PathBuf,
        #[arg(long, default_value_t = 2)]
        pair_bound: usize,
    },
    /// Extension of partial isomorphisms between small parts.
    Homogeneity {
        chain: PathBuf,
        #[arg(long, default_value_t = 2)]
        part_bound: usize,
        /// Accept automorphisms of the stage only.
        #[arg(long)]
        strict: bool,
    },
    /// Permutations of a predicate extended to automorphisms or later embeddings.
    Indiscernibles {
        /// A chain file, or a structure file read as a one-stage chain.
        file: PathBuf,
        /// Sort or unary relation holding the indiscernibles.
        #[arg(long)]
        pred: String,
        /// Class of a structure input.
        #[arg(long, default_value = "projection")]
        class: String,
        /// Grow a projection structure until its fibers are equal.
        #[arg(long)]
        equalize: bool,
        #[arg(long)]
        strict: bool,
        /// Seed for sampling beyond six indiscernibles.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Glue a guest to a host along a merger spec file.
    Merge {
        spec: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Ehrenfeucht-Fraisse game between two structures.
    Ef {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
    },
    /// End-extend the final stage of a k0-prime chain.
    EndExtend {
        chain: PathBuf,
        #[arg(short, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Amalgamate B over A into a k0 chain through a surrogate.
    ChainAmalgamate {
        chain: PathBuf,
        a: PathBuf,
        b: PathBuf,
        /// Embedding of A into the final stage; the first one found by default.
        #[arg(long)]
        embedding: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Trees of guests.
    Tree {
        #[command(subcommand)]
        command: TreeCommand,
    },
    /// Meet functions.
    Meet {
        #[command(subcommand)]
        command: MeetCommand,
    },
    /// Re-execute a chain's ledger and compare.
    Replay { chain: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum TreeCommand {
    Build {
        #[arg(long)]
        alphabet: usize,
        #[arg(long)]
        depth: usize,
        /// Guest template; `alphabet` B elements with one preimage each by default.
        #[arg(long)]
        guest: Option<PathBuf>,
        #[arg(long, default_value = "B")]
        predicate: String,
        /// Keep only branches constant from this level on.
        #[arg(long)]
        eventually_constant: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    Check {
        tree: PathBuf,
    },
    /// Joint embedding of two trees with projection guests.
    Jointembed {
        t0: PathBuf,
        t1: PathBuf,
        /// New B elements added by every guest joint embedding.
        #[arg(long, default_value_t = 0)]
        extra: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Subcommand)]
pub enum MeetCommand {
    Build {
        /// Size of the ordered X.
        #[arg(long)]
        x_size: usize,
        /// 0/1 strings of length `x_size`, least X coordinate first.
        vectors: Vec<String>,
        #[command(flatten)]
        out: Output,
    },
    Check {
        file: PathBuf,
        /// Also search for bit vectors realizing the structure.
        #[arg(long)]
        realize: bool,
    },
}

#[derive(Debug, Args)]
pub struct Output {
    /// Where to write the produced structure, chain or tree.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
