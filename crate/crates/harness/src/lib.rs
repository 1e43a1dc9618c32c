//! Command-line experiments over `fracwave-core`: configuration, result tables, figures and
//! the subcommand implementations behind the `fracwave` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod experiments;
pub mod figures;
pub mod outcome;
pub mod table;

pub use config::ExperimentConfig;
pub use outcome::{HarnessError, Outcome};
pub use table::ResultTable;
