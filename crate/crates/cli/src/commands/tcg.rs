use std::path::PathBuf;

use bypasslab_core::cdr::{parse_cdr_file, Dataset, Label};
use bypasslab_core::tcg::{probe_records, run_campaign, ProbeCampaign, TcgError, World};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::ManifestBuilder;

use super::{sibling, simulate::TruthFile};

#[derive(clap::Args)]
pub struct Args {
    /// World directory produced by `simulate` (cdr.csv + truth.json).
    #[arg(long)]
    pub world: PathBuf,
    /// Probe calls to place.
    #[arg(long, default_value_t = 100)]
    pub probes: u64,
    /// Operator-owned target numbers, taken from the normal population.
    #[arg(long, default_value_t = 5)]
    pub targets: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Relative cost per probe.
    #[arg(long, default_value_t = 1.0)]
    pub unit_cost: f64,
    /// Campaign report JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a copy of the world CSV with probe CDRs appended.
    #[arg(long)]
    pub emit_probe_cdrs: bool,
}

#[derive(Serialize)]
struct CampaignFile<'a> {
    kind: &'static str,
    seed: u64,
    targets: usize,
    #[serde(flatten)]
    report: &'a bypasslab_core::tcg::CampaignReport,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let cdr_path = args.world.join("cdr.csv");
    let truth_path = args.world.join("truth.json");
    let parsed = parse_cdr_file(&cdr_path).map_err(|e| CliError::usage(e.to_string()))?;
    if !parsed.rejected.is_empty() {
        return Err(CliError::usage(format!(
            "{} has {} malformed lines; tcg needs a clean generated world",
            cdr_path.display(),
            parsed.rejected.len()
        )));
    }
    let truth_file: TruthFile = serde_json::from_str(
        &std::fs::read_to_string(&truth_path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", truth_path.display())))?,
    )
    .map_err(|e| CliError::usage(format!("{}: {e}", truth_path.display())))?;

    let world = World::new(parsed.dataset, truth_file.truth, truth_file.config);
    if args.targets == 0 {
        return Err(CliError::usage("targets must be >= 1"));
    }
    let target_numbers: Vec<String> = world
        .truth
        .labels
        .iter()
        .filter(|(_, l)| **l == Label::Normal)
        .take(args.targets)
        .map(|(s, _)| s.clone())
        .collect();
    let campaign = ProbeCampaign {
        n_probes: args.probes,
        seed: args.seed,
        target_numbers,
        unit_cost: args.unit_cost,
    };
    let (report, results) = run_campaign(&world, &campaign).map_err(|e| match e {
        TcgError::InvalidCampaign(_) | TcgError::NoFraudSims => CliError::usage(e.to_string()),
        other => CliError::runtime(other.to_string()),
    })?;

    let file = CampaignFile {
        kind: "campaign_report",
        seed: args.seed,
        targets: args.targets,
        report: &report,
    };
    super::write_file(&args.out, &serde_json::to_string_pretty(&file)?)?;

    let mut mb = ManifestBuilder::new("tcg");
    mb.param("probes", args.probes)
        .param("targets", args.targets)
        .param("seed", args.seed)
        .input("cdr", &cdr_path)?
        .input("truth", &truth_path)?;
    mb.output("report", &args.out)?;

    if args.emit_probe_cdrs {
        let extra = probe_records(&world, &results);
        let mut records = world.dataset.records().to_vec();
        records.extend(extra);
        let perturbed = Dataset::new(records, world.dataset.window_start, world.dataset.window_end);
        let probed_path = sibling(&args.out, "probed_cdr").with_extension("csv");
        perturbed
            .write_csv(&probed_path)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        mb.output("probed_cdr", &probed_path)?;
        eprintln!("probe-perturbed world written to {}", probed_path.display());
    }
    mb.write(&args.out)?;

    eprintln!(
        "campaign: {} probes, detected {} sims (rate {:.3}), routes {:?}",
        report.probes_spent,
        report.detected.len(),
        report.detection_rate,
        report.route_counts
    );
    Ok(())
}
