use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use bypasslab_core::cdr::{read_labels, Label};
use bypasslab_core::features::{align_labels, apply_scaler, fit_scaler, FeatureMatrix};
use bypasslab_core::learn::{
    evaluate, kmeans, split, train_forest, train_mlp, train_svm, train_tree, EvalReport,
    ForestParams, KMeansModel, MlpParams, ModelKind, ModelParams, SvmParams, TrainedModel,
    TreeParams,
};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{read_manifest_for, ManifestBuilder};

use super::sibling;

#[derive(clap::Args)]
pub struct Args {
    /// Feature CSV produced by `featurize`.
    #[arg(long)]
    pub features: PathBuf,
    /// Label CSV (sim_id,label).
    #[arg(long)]
    pub labels: PathBuf,
    /// tree | forest | svm | mlp | kmeans
    #[arg(long)]
    pub model: String,
    /// Model JSON output; the eval report lands at <stem>.eval.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Train share of the stratified split; accepts a/b or a decimal.
    #[arg(long, default_value = "2/3")]
    pub train_fraction: String,
    /// Trees in a forest.
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Features tried per forest split; 0 = ceil(sqrt(n_features)).
    #[arg(long, default_value_t = 0)]
    pub mtry: usize,
    #[arg(long, default_value_t = 12)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
    /// SVM regularization.
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    /// SVM or MLP training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Clusters for kmeans.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

pub fn parse_fraction(s: &str) -> Result<f64, CliError> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad_fraction(s))?;
            let den: f64 = den.trim().parse().map_err(|_| bad_fraction(s))?;
            if den == 0.0 {
                return Err(bad_fraction(s));
            }
            num / den
        }
        None => s.trim().parse().map_err(|_| bad_fraction(s))?,
    };
    if !(value > 0.0 && value < 1.0) {
        return Err(bad_fraction(s));
    }
    Ok(value)
}

fn bad_fraction(s: &str) -> CliError {
    CliError::usage(format!("train_fraction {s:?} must be a fraction in (0, 1)"))
}

/// Pulls the source-cdr digest out of the features manifest chain, when
/// that chain exists.
pub fn world_digest_of(features: &std::path::Path) -> Option<String> {
    let manifest = read_manifest_for(features)?;
    Some(manifest.inputs.get("cdr")?.sha256.clone())
}

#[derive(Serialize)]
struct EvalFile<'a> {
    kind: &'static str,
    model_kind: &'a str,
    model_path: String,
    world_digest: Option<String>,
    train_fraction: &'a str,
    seed: u64,
    train_rows: usize,
    test_rows: usize,
    report: &'a EvalReport,
}

#[derive(Serialize)]
struct ClusterRow {
    cluster: usize,
    normal: u64,
    fraud: u64,
    flagged_as: Label,
}

#[derive(Serialize)]
struct ClusterFile {
    kind: &'static str,
    model_kind: &'static str,
    model_path: String,
    world_digest: Option<String>,
    seed: u64,
    k: usize,
    inertia: f64,
    iterations: usize,
    crosstab: Vec<ClusterRow>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let kind = ModelKind::from_str(&args.model)
        .map_err(|_| CliError::usage(format!("unknown model kind {:?}; expected tree, forest, svm, mlp or kmeans", args.model)))?;
    let fraction = parse_fraction(&args.train_fraction)?;

    let matrix = FeatureMatrix::read_csv(&args.features)
        .map_err(|e| CliError::usage(format!("features: {e}")))?;
    if matrix.n_rows() == 0 {
        return Err(CliError::usage("feature file has no rows"));
    }
    let table = read_labels(&args.labels).map_err(|e| CliError::usage(e.to_string()))?;
    let labels = align_labels(&matrix, &table).map_err(|e| CliError::usage(e.to_string()))?;
    let world_digest = world_digest_of(&args.features);

    let mut hyper: BTreeMap<String, String> = BTreeMap::new();
    hyper.insert("model".into(), kind.as_str().into());
    hyper.insert("seed".into(), args.seed.to_string());

    if kind == ModelKind::Kmeans {
        return run_kmeans(&args, &matrix, &labels, world_digest, hyper);
    }

    let s = split(&labels, fraction, args.seed).map_err(|e| CliError::usage(e.to_string()))?;
    let train_m = matrix.take_rows(&s.train);
    let test_m = matrix.take_rows(&s.test);
    let train_y: Vec<Label> = s.train.iter().map(|&i| labels[i]).collect();
    let test_y: Vec<Label> = s.test.iter().map(|&i| labels[i]).collect();
    hyper.insert("train_fraction".into(), args.train_fraction.clone());

    let tree_params = TreeParams {
        max_depth: Some(args.max_depth),
        min_leaf: args.min_leaf,
    };
    let model = match kind {
        ModelKind::Tree => {
            hyper.insert("max_depth".into(), args.max_depth.to_string());
            hyper.insert("min_leaf".into(), args.min_leaf.to_string());
            let tree = train_tree(&train_m, &train_y, tree_params)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            TrainedModel::new(matrix.columns.clone(), None, ModelParams::Tree(tree))
        }
        ModelKind::Forest => {
            let params = ForestParams {
                n_trees: args.trees,
                m_try: args.mtry,
                bootstrap: true,
                tree: tree_params,
            };
            hyper.insert("n_trees".into(), args.trees.to_string());
            hyper.insert("m_try".into(), if args.mtry == 0 { "auto".into() } else { args.mtry.to_string() });
            hyper.insert("max_depth".into(), args.max_depth.to_string());
            hyper.insert("min_leaf".into(), args.min_leaf.to_string());
            let forest = train_forest(&train_m, &train_y, params, args.seed)
                .map_err(|e| CliError::usage(e.to_string()))?;
            TrainedModel::new(matrix.columns.clone(), None, ModelParams::Forest(forest))
        }
        ModelKind::Svm => {
            let params = SvmParams {
                lambda: args.lambda,
                epochs: args.epochs.unwrap_or(SvmParams::default().epochs),
            };
            hyper.insert("lambda".into(), params.lambda.to_string());
            hyper.insert("epochs".into(), params.epochs.to_string());
            let scaler = fit_scaler(&train_m).map_err(|e| CliError::usage(e.to_string()))?;
            let scaled = apply_scaler(&train_m, &scaler).map_err(|e| CliError::runtime(e.to_string()))?;
            let svm = train_svm(&scaled, &train_y, params, args.seed)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            if svm.standardization_warning {
                eprintln!("warning: training features did not look standardized");
            }
            TrainedModel::new(matrix.columns.clone(), Some(scaler), ModelParams::Svm(svm))
        }
        ModelKind::Mlp => {
            let params = MlpParams {
                epochs: args.epochs.unwrap_or(MlpParams::default().epochs),
            };
            hyper.insert("epochs".into(), params.epochs.to_string());
            hyper.insert("learning_rate".into(), "0.6".into());
            hyper.insert("momentum".into(), "0.3".into());
            let scaler = fit_scaler(&train_m).map_err(|e| CliError::usage(e.to_string()))?;
            let scaled = apply_scaler(&train_m, &scaler).map_err(|e| CliError::runtime(e.to_string()))?;
            let (mlp, history) = train_mlp(&scaled, &train_y, params, args.seed)
                .map_err(|e| CliError::runtime(e.to_string()))?;
            if let Some(last) = history.last() {
                eprintln!("mlp final loss {last:.6} after {} epochs", history.len());
            }
            TrainedModel::new(matrix.columns.clone(), Some(scaler), ModelParams::Mlp(mlp))
        }
        ModelKind::Kmeans => unreachable!("handled above"),
    };

    super::ensure_parent(&args.out)?;
    model.save(&args.out).map_err(|e| CliError::runtime(e.to_string()))?;
    let preds = model.predict(&test_m).map_err(|e| CliError::runtime(e.to_string()))?;
    let report = evaluate(&preds, &test_y)
        .map_err(|e| CliError::runtime(e.to_string()))?
        .with_flags(&preds, &test_m.sim_ids)
        .with_hyperparams(hyper);
    eprintln!("{}", report.text_table());
    if preds.windows(2).all(|w| w[0] == w[1]) && !preds.is_empty() {
        eprintln!(
            "warning: model predicts a single class on the held-out split; \
             the fixed mlp configuration in particular saturates beyond desk-scale inputs"
        );
    }

    let eval_path = sibling(&args.out, "eval");
    let eval = EvalFile {
        kind: "eval_report",
        model_kind: kind.as_str(),
        model_path: args.out.display().to_string(),
        world_digest,
        train_fraction: &args.train_fraction,
        seed: args.seed,
        train_rows: s.train.len(),
        test_rows: s.test.len(),
        report: &report,
    };
    super::write_file(&eval_path, &serde_json::to_string_pretty(&eval)?)?;

    write_train_manifest(&args, &eval_path)?;
    Ok(())
}

fn run_kmeans(
    args: &Args,
    matrix: &FeatureMatrix,
    labels: &[Label],
    world_digest: Option<String>,
    mut hyper: BTreeMap<String, String>,
) -> Result<(), CliError> {
    hyper.insert("k".into(), args.k.to_string());
    hyper.insert("max_iter".into(), args.max_iter.to_string());
    let scaler = fit_scaler(matrix).map_err(|e| CliError::usage(e.to_string()))?;
    let scaled = apply_scaler(matrix, &scaler).map_err(|e| CliError::runtime(e.to_string()))?;
    let result = kmeans(&scaled, args.k, args.seed, args.max_iter)
        .map_err(|e| CliError::usage(e.to_string()))?;

    // cluster-vs-label cross-tab; labels play no part in the clustering
    let mut counts = vec![[0u64; 2]; args.k];
    for (&cluster, label) in result.assignment.iter().zip(labels) {
        counts[cluster][if *label == Label::Fraud { 1 } else { 0 }] += 1;
    }
    let fraud_clusters: Vec<bool> = counts.iter().map(|c| c[1] > c[0]).collect();
    let crosstab: Vec<ClusterRow> = counts
        .iter()
        .enumerate()
        .map(|(cluster, c)| ClusterRow {
            cluster,
            normal: c[0],
            fraud: c[1],
            flagged_as: if fraud_clusters[cluster] { Label::Fraud } else { Label::Normal },
        })
        .collect();

    let model = TrainedModel::new(
        matrix.columns.clone(),
        Some(scaler),
        ModelParams::Kmeans(KMeansModel {
            centroids: result.centroids.clone(),
            fraud_clusters,
        }),
    );
    super::ensure_parent(&args.out)?;
    model.save(&args.out).map_err(|e| CliError::runtime(e.to_string()))?;

    let cluster_path = sibling(&args.out, "eval");
    let file = ClusterFile {
        kind: "cluster_report",
        model_kind: "kmeans",
        model_path: args.out.display().to_string(),
        world_digest,
        seed: args.seed,
        k: args.k,
        inertia: result.inertia,
        iterations: result.iterations,
        crosstab,
    };
    super::write_file(&cluster_path, &serde_json::to_string_pretty(&file)?)?;
    eprintln!(
        "kmeans: k={} inertia={:.3} after {} iterations",
        args.k, result.inertia, result.iterations
    );

    write_train_manifest(args, &cluster_path)?;
    Ok(())
}

fn write_train_manifest(args: &Args, report_path: &std::path::Path) -> Result<(), CliError> {
    let mut mb = ManifestBuilder::new("train");
    mb.param("model", &args.model)
        .param("seed", args.seed)
        .param("train_fraction", &args.train_fraction)
        .input("features", &args.features)?
        .input("labels", &args.labels)?;
    mb.output("model", &args.out)?.output("report", report_path)?;
    mb.write(&args.out)?;
    Ok(())
}
