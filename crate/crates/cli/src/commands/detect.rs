use std::path::PathBuf;

use bypasslab_core::features::FeatureMatrix;
use bypasslab_core::learn::{LearnError, TrainedModel};

use crate::error::CliError;
use crate::manifest::ManifestBuilder;

#[derive(clap::Args)]
pub struct Args {
    /// Feature CSV to score.
    #[arg(long)]
    pub features: PathBuf,
    /// Trained model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// Output flags CSV (sim_id,flag).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let matrix = FeatureMatrix::read_csv(&args.features)
        .map_err(|e| CliError::usage(format!("features: {e}")))?;
    let model = TrainedModel::load(&args.model).map_err(|e| match e {
        LearnError::Io { .. } => CliError::runtime(e.to_string()),
        other => CliError::usage(other.to_string()),
    })?;
    let preds = model.predict(&matrix).map_err(|e| CliError::usage(e.to_string()))?;

    let mut out = String::from("sim_id,flag\n");
    for (sim, label) in matrix.sim_ids.iter().zip(&preds) {
        out.push_str(sim);
        out.push(',');
        out.push_str(label.as_str());
        out.push('\n');
    }
    super::write_file(&args.out, &out)?;

    let mut mb = ManifestBuilder::new("detect");
    mb.input("features", &args.features)?.input("model", &args.model)?;
    mb.output("flags", &args.out)?;
    mb.write(&args.out)?;

    let flagged = preds
        .iter()
        .filter(|l| **l == bypasslab_core::cdr::Label::Fraud)
        .count();
    eprintln!("flagged {flagged} of {} sims", matrix.n_rows());
    Ok(())
}
