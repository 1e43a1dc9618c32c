use std::process::ExitCode;

use clap::Parser;
use fracwave_harness::cli::{run, Cli};

fn main() -> ExitCode {
    run(&Cli::parse()).into()
}
