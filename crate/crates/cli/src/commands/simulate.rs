use std::path::PathBuf;

use bypasslab_core::cdr::write_labels;
use bypasslab_core::synth::{generate, parse_scenario_file, GroundTruth, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::ManifestBuilder;

use super::ensure_dir;

#[derive(clap::Args)]
pub struct Args {
    /// Scenario config, flat key=value lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for cdr.csv, labels.csv and truth.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// truth.json: the ground truth plus the effective config, so a world
/// directory is self-contained for later tcg runs.
#[derive(Debug, Serialize, Deserialize)]
pub struct TruthFile {
    pub config: ScenarioConfig,
    #[serde(flatten)]
    pub truth: GroundTruth,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let mut cfg =
        parse_scenario_file(&args.config).map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let (dataset, truth) = generate(&cfg).map_err(|e| CliError::usage(e.to_string()))?;

    ensure_dir(&args.out)?;
    let cdr_path = args.out.join("cdr.csv");
    let labels_path = args.out.join("labels.csv");
    let truth_path = args.out.join("truth.json");

    dataset
        .write_csv(&cdr_path)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    write_labels(&truth.labels, &labels_path).map_err(|e| CliError::runtime(e.to_string()))?;
    let truth_file = TruthFile {
        config: cfg.clone(),
        truth,
    };
    super::write_file(&truth_path, &serde_json::to_string_pretty(&truth_file)?)?;

    let mut mb = ManifestBuilder::new("simulate");
    mb.param("seed", cfg.seed)
        .param("config", args.config.display())
        .input("config", &args.config)?;
    mb.output("cdr", &cdr_path)?
        .output("labels", &labels_path)?
        .output("truth", &truth_path)?;
    mb.write(&args.out)?;

    eprintln!(
        "simulated {} records for {} sims into {}",
        dataset.len(),
        truth_file.truth.labels.len(),
        args.out.display()
    );
    Ok(())
}
