use std::path::PathBuf;

use bypasslab_core::cdr::{clean, parse_cdr_file, CdrError};
use bypasslab_core::features::{apply_scaler, extract, fit_scaler, pca};

use crate::error::CliError;
use crate::manifest::ManifestBuilder;

use super::sibling;

#[derive(clap::Args)]
pub struct Args {
    /// CDR CSV to profile.
    #[arg(long)]
    pub cdr: PathBuf,
    /// Output feature CSV; clean stats land at <stem>.cleanstats.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also standardize and project onto this many principal components,
    /// writing <stem>.scaler.json, <stem>.pca.json and <stem>.pca.csv.
    #[arg(long)]
    pub pca: Option<usize>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let parsed = parse_cdr_file(&args.cdr).map_err(|e| match e {
        CdrError::Schema(_) => CliError::usage(e.to_string()),
        other => CliError::runtime(other.to_string()),
    })?;
    for reject in &parsed.rejected {
        eprintln!("{}:{}: rejected: {}", args.cdr.display(), reject.line, reject.reason);
    }

    let (cleaned, mut stats) = clean(&parsed.dataset);
    stats.extra_columns = parsed.extra_columns;
    let matrix = extract(&cleaned);

    super::ensure_parent(&args.out)?;
    matrix
        .write_csv(&args.out)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let stats_path = sibling(&args.out, "cleanstats");
    super::write_file(&stats_path, &serde_json::to_string(&stats)?)?;

    let mut mb = ManifestBuilder::new("featurize");
    mb.input("cdr", &args.cdr)?;
    mb.output("features", &args.out)?
        .output("cleanstats", &stats_path)?;

    if let Some(k) = args.pca {
        mb.param("pca", k);
        let scaler = fit_scaler(&matrix).map_err(|e| CliError::usage(e.to_string()))?;
        let standardized =
            apply_scaler(&matrix, &scaler).map_err(|e| CliError::runtime(e.to_string()))?;
        let (components, projected) =
            pca(&standardized, k).map_err(|e| CliError::usage(e.to_string()))?;
        let scaler_path = sibling(&args.out, "scaler");
        let pca_path = sibling(&args.out, "pca");
        let projected_path = pca_path.with_extension("csv");
        super::write_file(&scaler_path, &serde_json::to_string_pretty(&scaler)?)?;
        super::write_file(&pca_path, &serde_json::to_string_pretty(&components)?)?;
        projected
            .write_csv(&projected_path)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        mb.output("scaler", &scaler_path)?
            .output("pca", &pca_path)?
            .output("pca_csv", &projected_path)?;
        let explained: f64 = components.explained_variance.iter().sum();
        let total = scaler.constant.iter().filter(|c| !**c).count().max(1) as f64;
        eprintln!(
            "pca: {} components explain {:.1}% of standardized variance",
            k,
            100.0 * explained / total
        );
    }
    mb.write(&args.out)?;

    eprintln!(
        "profiled {} sims from {} records ({} rejected lines, stats {:?})",
        matrix.n_rows(),
        cleaned.len(),
        parsed.rejected.len(),
        stats
    );
    Ok(())
}
