//! The `forge` command line: argument parsing, commands and reports.

pub mod args;
pub mod report;
pub mod run;

pub use args::{Cli, Format};
pub use report::{Report, Status};
pub use run::{execute, render};
