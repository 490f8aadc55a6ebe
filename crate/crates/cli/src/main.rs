//! `bypasslab` — synthetic SIMbox worlds and the detection pipeline.
//!
//! Subcommands mirror the four pipeline stages: `simulate` builds a
//! labeled CDR world, `featurize` turns it into per-SIM usage profiles,
//! `train`/`detect` fit and apply models, `tcg` runs probe campaigns,
//! and `report` consolidates everything in a run directory.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.
//! Diagnostics go to stderr; data only ever goes to files.

mod commands;
mod error;
mod manifest;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Parser)]
#[command(name = "bypasslab", version, about = "SIMbox bypass-fraud detection lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic CDR world (cdr.csv, labels.csv, truth.json).
    Simulate(commands::simulate::Args),
    /// Clean a CDR file and extract per-SIM features.
    Featurize(commands::featurize::Args),
    /// Train a model and evaluate it on a held-out split.
    Train(commands::train::Args),
    /// Apply a trained model to a feature file.
    Detect(commands::detect::Args),
    /// Run a test-call-generation campaign against a world directory.
    Tcg(commands::tcg::Args),
    /// Consolidate eval and campaign reports from a run directory.
    Report(commands::report::Args),
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Featurize(args) => commands::featurize::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Detect(args) => commands::detect::run(args),
        Command::Tcg(args) => commands::tcg::run(args),
        Command::Report(args) => commands::report::run(args),
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
