use std::path::{Path, PathBuf};

use bypasslab_core::learn::EvalReport;
use bypasslab_core::tcg::{comparison_text, ComparisonRow};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::ManifestBuilder;

#[derive(clap::Args)]
pub struct Args {
    /// Run directory to scan for eval and campaign reports.
    #[arg(long)]
    pub run: PathBuf,
    /// Output stem; writes <out>.json and <out>.txt.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Deserialize)]
struct EvalFileIn {
    kind: String,
    model_kind: String,
    world_digest: Option<String>,
    report: EvalReport,
}

#[derive(Debug, Deserialize)]
struct CampaignFileIn {
    kind: String,
    detected: Vec<String>,
    detection_rate: f64,
    probes_spent: u64,
    cost_proxy: f64,
    world_digest: String,
}

#[derive(Serialize)]
struct ReportFile {
    kind: &'static str,
    world_digest: Option<String>,
    models: Vec<ModelSummary>,
    campaigns: Vec<CampaignSummary>,
    comparison: Vec<ComparisonRow>,
}

#[derive(Serialize)]
struct ModelSummary {
    name: String,
    source: String,
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    fpr: f64,
    false_positives: u64,
}

#[derive(Serialize)]
struct CampaignSummary {
    name: String,
    source: String,
    detection_rate: f64,
    detected: usize,
    probes_spent: u64,
    cost_proxy: f64,
}

fn json_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?
            .path();
        if path.is_dir() {
            json_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    Ok(())
}

pub fn run(args: Args) -> Result<(), CliError> {
    let mut files = Vec::new();
    json_files(&args.run, &mut files)?;
    files.sort();

    let mut models = Vec::new();
    let mut campaigns = Vec::new();
    let mut world_digests: Vec<(String, String)> = Vec::new(); // (source, digest)
    for path in &files {
        let Ok(content) = std::fs::read_to_string(path) else {
            continue;
        };
        let source = path
            .strip_prefix(&args.run)
            .unwrap_or(path)
            .display()
            .to_string();
        // artifact names without the .model.eval / .eval tags
        let stem = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .trim_end_matches(".eval")
            .trim_end_matches(".model")
            .to_string();
        if let Ok(eval) = serde_json::from_str::<EvalFileIn>(&content) {
            if eval.kind == "eval_report" {
                if let Some(d) = &eval.world_digest {
                    world_digests.push((source.clone(), d.clone()));
                }
                models.push((stem, source, eval));
                continue;
            }
        }
        if let Ok(c) = serde_json::from_str::<CampaignFileIn>(&content) {
            if c.kind == "campaign_report" {
                world_digests.push((source.clone(), c.world_digest.clone()));
                campaigns.push((stem, source, c));
            }
        }
    }

    if models.is_empty() && campaigns.is_empty() {
        return Err(CliError::usage(format!(
            "nothing to report: no eval or campaign reports under {}",
            args.run.display()
        )));
    }
    if let Some(((a_src, a), (b_src, b))) = world_digests
        .windows(2)
        .find_map(|w| (w[0].1 != w[1].1).then(|| (w[0].clone(), w[1].clone())))
    {
        return Err(CliError::usage(format!(
            "world mismatch: {a_src} was produced on {a} but {b_src} on {b}"
        )));
    }

    let mut comparison = Vec::new();
    for (name, _, c) in &campaigns {
        comparison.push(ComparisonRow {
            method: format!("tcg:{name}"),
            flags: c.detected.len() as u64,
            recall: c.detection_rate,
            false_positives: 0,
            cost_proxy: c.cost_proxy,
        });
    }
    for (name, _, eval) in &models {
        comparison.push(ComparisonRow {
            method: format!("{}:{name}", eval.model_kind),
            flags: eval.report.true_positives + eval.report.false_positives,
            recall: eval.report.recall,
            false_positives: eval.report.false_positives,
            cost_proxy: 0.0,
        });
    }

    let report = ReportFile {
        kind: "comparison_report",
        world_digest: world_digests.first().map(|(_, d)| d.clone()),
        models: models
            .iter()
            .map(|(name, source, e)| ModelSummary {
                name: name.clone(),
                source: source.clone(),
                accuracy: e.report.accuracy,
                precision: e.report.precision,
                recall: e.report.recall,
                f1: e.report.f1,
                fpr: e.report.fpr,
                false_positives: e.report.false_positives,
            })
            .collect(),
        campaigns: campaigns
            .iter()
            .map(|(name, source, c)| CampaignSummary {
                name: name.clone(),
                source: source.clone(),
                detection_rate: c.detection_rate,
                detected: c.detected.len(),
                probes_spent: c.probes_spent,
                cost_proxy: c.cost_proxy,
            })
            .collect(),
        comparison,
    };

    let json_path = args.out.with_extension("json");
    let txt_path = args.out.with_extension("txt");
    super::write_file(&json_path, &serde_json::to_string_pretty(&report)?)?;
    super::write_file(&txt_path, &comparison_text(&report.comparison))?;

    let mut mb = ManifestBuilder::new("report");
    mb.param("run", args.run.display());
    mb.output("json", &json_path)?.output("text", &txt_path)?;
    mb.write(&json_path)?;

    eprintln!(
        "report over {} models and {} campaigns written to {}",
        report.models.len(),
        report.campaigns.len(),
        json_path.display()
    );
    Ok(())
}
