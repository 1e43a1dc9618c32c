use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, TestfnPreset};
use crate::experiments::{self, Context, Report};
use crate::figures::{emit_figures, tables_in};
use crate::outcome::{HarnessError, Outcome};
use crate::table::HASH_COLUMN;

pub const OUT_ENV: &str = "FRACWAVE_OUT";
const DEFAULT_OUT: &str = "results";

/// Verification suites and simulations for structurally damped σ-evolution equations.
///
/// Exit codes: 0 all checks passed, 1 assertion failure, 2 usage or configuration error,
/// 3 numerical non-convergence.
#[derive(Debug, Parser)]
#[command(name = "fracwave", version)]
pub struct Cli {
    /// Experiment configuration (TOML); missing keys keep their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", env = OUT_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Multiplies every pass/fail tolerance.
    #[arg(long, global = true, value_name = "X")]
    pub tolerance_scale: Option<f64>,
    /// Overrides one config field, e.g. `--set lifespan.sim.dt=0.25`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decay majorants, derivative bounds, composition and scaling over the lemma matrix.
    VerifyLemmas {
        /// Negative control: claim one extra power of decay in every majorant.
        #[arg(long)]
        inject_wrong_majorant: bool,
    },
    /// One run from zero displacement and a Gaussian velocity bump.
    Blowup {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Expected verdict: completed, blew-up or step-collapse.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Lifespan sweep over the configured ε values and fitted exponent.
    Lifespan,
    /// Weak-form functionals and the contradiction bound over an R ladder.
    Testfn {
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
    },
    /// Linear decay rates on the pre-wrap-around window.
    Decay,
    /// SVG figures and gnuplot scripts for result tables (default: every table in --out).
    Figures { tables: Vec<PathBuf> },
    /// Randomised property suites.
    Selftest {
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Re-checks digests and config hashes of the artifacts in a directory (default: --out).
    /// With --config, --set, --seed or --tolerance-scale, hashes must also match that
    /// configuration.
    Verify { dir: Option<PathBuf> },
    /// Prints the effective configuration.
    Config,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PresetArg {
    Rising,
    ZeroData,
    NegativeData,
}

impl From<PresetArg> for TestfnPreset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Rising => TestfnPreset::Rising,
            PresetArg::ZeroData => TestfnPreset::ZeroData,
            PresetArg::NegativeData => TestfnPreset::NegativeData,
        }
    }
}

impl Cli {
    /// File, then `--set`, then dedicated flags.
    pub fn effective_config(&self) -> Result<ExperimentConfig, HarnessError> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| HarnessError::Usage(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut cfg = ExperimentConfig::from_toml_with(&text, &self.sets)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(t) = self.tolerance_scale {
            cfg.tolerance_scale = t;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        match &self.command {
            Command::VerifyLemmas { inject_wrong_majorant: true } => cfg.verify_lemmas.inject_wrong_majorant = true,
            Command::Blowup { p, epsilon, expect } => {
                if let Some(p) = p {
                    cfg.blowup.sim.p = *p;
                }
                if let Some(e) = epsilon {
                    cfg.blowup.epsilon = *e;
                }
                if let Some(x) = expect {
                    cfg.blowup.expect = Some(x.clone());
                }
            }
            Command::Testfn { preset: Some(p) } => cfg.testfn.preset = (*p).into(),
            Command::Selftest { cases: Some(c) } => cfg.selftest.cases = *c,
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn name(&self) -> &'static str {
        match self.command {
            Command::VerifyLemmas { .. } => "verify-lemmas",
            Command::Blowup { .. } => "blowup",
            Command::Lifespan => "lifespan",
            Command::Testfn { .. } => "testfn",
            Command::Decay => "decay",
            Command::Figures { .. } => "figures",
            Command::Selftest { .. } => "selftest",
            Command::Verify { .. } => "verify",
            Command::Config => "config",
        }
    }
}

/// Runs a parsed command line, reporting to stdout/stderr, and returns the exit class.
pub fn run(cli: &Cli) -> Outcome {
    match execute(cli) {
        Ok(report) => {
            for m in &report.messages {
                eprintln!("{}: {m}", cli.name());
            }
            report.outcome
        }
        Err(e) => {
            eprintln!("{}: {e}", cli.name());
            e.outcome()
        }
    }
}

/// Parses `args` (including the program name) and runs them. Parse failures are usage errors.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                Outcome::Usage
            } else {
                Outcome::Pass
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Report, HarnessError> {
    let cfg = cli.effective_config()?;
    if let Command::Config = cli.command {
        print!("# {HASH_COLUMN}: {}\n{}", cfg.hash(), cfg.to_toml());
        return Ok(Report::new(Outcome::Pass));
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let ctx = Context::new(cfg, out);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = ctx.config.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| HarnessError::Usage(format!("cannot build worker pool: {e}")))?;
    pool.install(|| dispatch(cli, &ctx))
}

fn dispatch(cli: &Cli, ctx: &Context) -> Result<Report, HarnessError> {
    let report = match &cli.command {
        Command::VerifyLemmas { .. } => experiments::verify_lemmas(ctx)?,
        Command::Blowup { .. } => experiments::blowup(ctx)?,
        Command::Lifespan => experiments::lifespan(ctx)?,
        Command::Testfn { .. } => experiments::testfn(ctx)?,
        Command::Decay => experiments::decay(ctx)?,
        Command::Selftest { .. } => experiments::selftest(ctx)?,
        Command::Figures { tables } => {
            let paths = if tables.is_empty() { tables_in(&ctx.out)? } else { tables.clone() };
            return emit_figures(&paths);
        }
        Command::Verify { dir } => {
            let dir = dir.as_deref().unwrap_or(&ctx.out);
            let pinned =
                cli.config.is_some() || !cli.sets.is_empty() || cli.seed.is_some() || cli.tolerance_scale.is_some();
            return experiments::verify_outputs(dir, pinned.then_some(ctx.hash.as_str()));
        }
        Command::Config => unreachable!("handled before the pool is built"),
    };
    persist(cli.name(), ctx, report)
}

/// Writes tables, JSON artifacts and the effective config; one writer per file.
fn persist(name: &str, ctx: &Context, mut report: Report) -> Result<Report, HarnessError> {
    let dir: &Path = &ctx.out;
    std::fs::create_dir_all(dir)?;
    for t in &report.tables {
        let path = t.write(dir, &ctx.hash)?;
        report.messages.push(format!("wrote {}", path.display()));
    }
    for (file, value) in &report.artifacts {
        let text = serde_json::to_string_pretty(value).expect("artifact serialises");
        std::fs::write(dir.join(file), text + "\n")?;
    }
    let cfg_text = format!("# {HASH_COLUMN}: {}\n{}", ctx.hash, ctx.config.to_toml());
    std::fs::write(dir.join(format!("{name}.config.toml")), cfg_text)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("fracwave").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file_and_set_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 1\n[blowup]\nepsilon = 0.5\n").unwrap();
        let p = path.to_str().unwrap();
        let cli = parse(&["--config", p, "--set", "seed=2", "--seed", "3", "blowup", "--p", "4.0"]);
        let cfg = cli.effective_config().unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.blowup.epsilon, 0.5);
        assert_eq!(cfg.blowup.sim.p, 4.0);
        let cli = parse(&["--set", "blowup.epsilon=0.25", "blowup"]);
        assert_eq!(cli.effective_config().unwrap().blowup.epsilon, 0.25);
    }

    #[test]
    fn bad_input_is_a_usage_error() {
        assert_eq!(run_from(["fracwave", "no-such-command"]), Outcome::Usage);
        assert_eq!(run_from(["fracwave", "--tolerance-scale", "-1", "config"]), Outcome::Usage);
        assert_eq!(run_from(["fracwave", "--config", "/nonexistent.toml", "config"]), Outcome::Usage);
        assert_eq!(run_from(["fracwave", "--set", "blowup.nope=1", "config"]), Outcome::Usage);
    }

    #[test]
    fn global_flags_work_after_the_subcommand() {
        let cli = parse(&["selftest", "--seed", "5", "--workers", "2", "--cases", "3"]);
        let cfg = cli.effective_config().unwrap();
        assert_eq!((cfg.seed, cfg.workers, cfg.selftest.cases), (5, Some(2), 3));
    }
}
