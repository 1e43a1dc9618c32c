//! Subcommand implementations. Each returns the tables it produced and an outcome; the
//! caller writes the tables.

use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::outcome::Outcome;
use crate::table::ResultTable;

mod lemmas;
mod selftest;
mod sim;
mod testfn;
mod verify;

pub use lemmas::verify_lemmas;
pub use selftest::{selftest, PROPERTIES};
pub use sim::{blowup, decay, lifespan};
pub use testfn::testfn;
pub use verify::verify_outputs;

/// Everything a subcommand needs besides its own config section.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub hash: String,
}

impl Context {
    pub fn new(config: ExperimentConfig, out: PathBuf) -> Self {
        let hash = config.hash();
        Self { config, out, hash }
    }

    /// A tolerance scaled by `tolerance_scale`.
    pub fn tol(&self, base: f64) -> f64 {
        base * self.config.tolerance_scale
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub tables: Vec<ResultTable>,
    pub outcome: Outcome,
    /// Human-readable lines for stderr.
    pub messages: Vec<String>,
    /// Extra JSON artifacts, `(file name, value)`.
    pub artifacts: Vec<(String, serde_json::Value)>,
}

impl Report {
    pub fn new(outcome: Outcome) -> Self {
        Self { tables: Vec::new(), outcome, messages: Vec::new(), artifacts: Vec::new() }
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.outcome = self.outcome.and(Outcome::AssertionFailure);
        self.messages.push(msg.into());
    }

    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}
