//! End-to-end subcommand tests against the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bypasslab"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary should run")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

fn sha(path: &Path) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(std::fs::read(path).unwrap());
    format!("{:x}", h.finalize())
}

fn write(path: &Path, content: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, content).unwrap();
}

fn minimal_cfg(dir: &Path) -> PathBuf {
    let p = dir.join("minimal.cfg");
    write(&p, "seed=1\ndays=1\nn_subscribers=1\ncells=3\nn_simboxes=0\n");
    p
}

fn small_world_cfg(dir: &Path) -> PathBuf {
    let p = dir.join("world.cfg");
    write(
        &p,
        "seed=11\ndays=5\nn_subscribers=90\ncells=12\nn_simboxes=2\nsims_per_box=5\nintl_call_rate=0.5\nbypass_fraction=0.8\n",
    );
    p
}

/// simulate + featurize, returning (world_dir, features_path).
fn make_world(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = small_world_cfg(dir);
    let world = dir.join("world");
    assert_ok(&run_in(
        dir,
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", world.to_str().unwrap()],
    ));
    let features = dir.join("run/features.csv");
    assert_ok(&run_in(
        dir,
        &[
            "featurize",
            "--cdr",
            world.join("cdr.csv").to_str().unwrap(),
            "--out",
            features.to_str().unwrap(),
        ],
    ));
    (world, features)
}

#[test]
fn simulate_minimal_world_is_all_normal() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = minimal_cfg(tmp.path());
    let out_dir = tmp.path().join("world");
    let out = run_in(
        tmp.path(),
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
    );
    assert_ok(&out);
    for f in ["cdr.csv", "labels.csv", "truth.json"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let labels = std::fs::read_to_string(out_dir.join("labels.csv")).unwrap();
    assert!(labels.lines().skip(1).all(|l| l.is_empty() || l.ends_with("NORMAL")));
    assert!(!labels.contains("FRAUD"));
}

#[test]
fn simulate_is_reproducible_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_world_cfg(tmp.path());
    for name in ["a", "b"] {
        assert_ok(&run_in(
            tmp.path(),
            &[
                "simulate",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                tmp.path().join(name).to_str().unwrap(),
            ],
        ));
    }
    for f in ["cdr.csv", "labels.csv", "truth.json"] {
        assert_eq!(
            sha(&tmp.path().join("a").join(f)),
            sha(&tmp.path().join("b").join(f)),
            "{f} differs between identical runs"
        );
    }
    // a --seed override changes the world
    assert_ok(&run_in(
        tmp.path(),
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("c").to_str().unwrap(),
            "--seed",
            "999",
        ],
    ));
    assert_ne!(
        sha(&tmp.path().join("a/cdr.csv")),
        sha(&tmp.path().join("c/cdr.csv"))
    );
}

#[test]
fn invalid_antispam_config_exits_2_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    write(
        &cfg,
        "seed=1\ndays=1\nn_subscribers=5\nantispam.enabled=true\nantispam.block_prob=0.8\nantispam.reroute_prob=0.4\n",
    );
    let out = run_in(
        tmp.path(),
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("w").to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("antispam"), "{}", stderr(&out));
}

#[test]
fn featurize_header_only_file_succeeds_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let cdr = tmp.path().join("empty.csv");
    write(&cdr, "record_id,timestamp,sim_id,imei,imsi,peer_id,cell_id,direction,service,duration_sec,peer_is_international\n");
    let features = tmp.path().join("features.csv");
    let out = run_in(
        tmp.path(),
        &["featurize", "--cdr", cdr.to_str().unwrap(), "--out", features.to_str().unwrap()],
    );
    assert_ok(&out);
    let content = std::fs::read_to_string(&features).unwrap();
    assert_eq!(content.lines().count(), 1, "header-only output expected");
    assert!(content.starts_with("sim_id,total_calls,"));
}

#[test]
fn featurize_reports_rejects_but_succeeds_with_survivors() {
    let tmp = tempfile::tempdir().unwrap();
    let cdr = tmp.path().join("dirty.csv");
    write(
        &cdr,
        "record_id,timestamp,sim_id,imei,imsi,peer_id,cell_id,direction,service,duration_sec,peer_is_international\n\
         R1,2024-01-01T10:00:00Z,A,DA,IA,P,C,MO,VOICE,60,0\n\
         R2,2024-01-01T11:00:00Z,A,DA,IA,P,C,XX,VOICE,60,0\n",
    );
    let features = tmp.path().join("features.csv");
    let out = run_in(
        tmp.path(),
        &["featurize", "--cdr", cdr.to_str().unwrap(), "--out", features.to_str().unwrap()],
    );
    assert_ok(&out);
    assert!(stderr(&out).contains("rejected"), "{}", stderr(&out));
    assert!(stderr(&out).contains("direction"));
    // input untouched
    assert!(std::fs::read_to_string(&cdr).unwrap().contains("XX"));
}

#[test]
fn featurize_output_digest_is_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, _) = make_world(tmp.path());
    let twice: Vec<String> = ["f1.csv", "f2.csv"]
        .iter()
        .map(|name| {
            let path = tmp.path().join(name);
            assert_ok(&run_in(
                tmp.path(),
                &[
                    "featurize",
                    "--cdr",
                    world.join("cdr.csv").to_str().unwrap(),
                    "--out",
                    path.to_str().unwrap(),
                ],
            ));
            sha(&path)
        })
        .collect();
    assert_eq!(twice[0], twice[1]);
}

#[test]
fn train_rejects_unknown_model_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, features) = make_world(tmp.path());
    let out = run_in(
        tmp.path(),
        &[
            "train",
            "--features",
            features.to_str().unwrap(),
            "--labels",
            world.join("labels.csv").to_str().unwrap(),
            "--model",
            "boosted-stumps",
            "--out",
            tmp.path().join("m.json").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown model kind"));
}

#[test]
fn train_manifest_echoes_the_default_split() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, features) = make_world(tmp.path());
    let model = tmp.path().join("run/forest.model.json");
    assert_ok(&run_in(
        tmp.path(),
        &[
            "train",
            "--features",
            features.to_str().unwrap(),
            "--labels",
            world.join("labels.csv").to_str().unwrap(),
            "--model",
            "forest",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/forest.model.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["params"]["train_fraction"], "2/3");
    assert_eq!(manifest["params"]["seed"], "42");
    // model json carries schema_version and bound columns
    let model_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(model_json["schema_version"], 1);
    assert_eq!(model_json["columns"][0], "total_calls");
}

#[test]
fn kmeans_train_emits_cluster_crosstab() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, features) = make_world(tmp.path());
    let model = tmp.path().join("run/kmeans.model.json");
    assert_ok(&run_in(
        tmp.path(),
        &[
            "train",
            "--features",
            features.to_str().unwrap(),
            "--labels",
            world.join("labels.csv").to_str().unwrap(),
            "--model",
            "kmeans",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/kmeans.model.eval.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["kind"], "cluster_report");
    let crosstab = report["crosstab"].as_array().unwrap();
    assert_eq!(crosstab.len(), 2);
    let total: u64 = crosstab
        .iter()
        .map(|row| row["normal"].as_u64().unwrap() + row["fraud"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 100, "every sim lands in exactly one cluster");
}

#[test]
fn detect_covers_every_row_and_matches_stored_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, features) = make_world(tmp.path());
    let model = tmp.path().join("run/forest.model.json");
    assert_ok(&run_in(
        tmp.path(),
        &[
            "train",
            "--features",
            features.to_str().unwrap(),
            "--labels",
            world.join("labels.csv").to_str().unwrap(),
            "--model",
            "forest",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    let flags = tmp.path().join("run/flags.csv");
    assert_ok(&run_in(
        tmp.path(),
        &[
            "detect",
            "--features",
            features.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--out",
            flags.to_str().unwrap(),
        ],
    ));

    let feature_rows = std::fs::read_to_string(&features).unwrap().lines().count() - 1;
    let flag_content = std::fs::read_to_string(&flags).unwrap();
    assert_eq!(flag_content.lines().count() - 1, feature_rows);

    // flags agree with the stored test-split predictions
    let eval: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/forest.model.eval.json")).unwrap(),
    )
    .unwrap();
    let flagged_at_train: std::collections::HashSet<&str> = eval["report"]["flagged"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let tp = eval["report"]["true_positives"].as_u64().unwrap();
    let fp = eval["report"]["false_positives"].as_u64().unwrap();
    assert_eq!(flagged_at_train.len() as u64, tp + fp);
    let flagged_now: std::collections::HashSet<&str> = flag_content
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",FRAUD"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    for sim in &flagged_at_train {
        assert!(flagged_now.contains(sim), "{sim} flagged at train time but not by detect");
    }
}

#[test]
fn detect_rejects_missing_columns_naming_them() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, features) = make_world(tmp.path());
    let model = tmp.path().join("run/tree.model.json");
    assert_ok(&run_in(
        tmp.path(),
        &[
            "train",
            "--features",
            features.to_str().unwrap(),
            "--labels",
            world.join("labels.csv").to_str().unwrap(),
            "--model",
            "tree",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    // drop a column from the feature csv
    let full = std::fs::read_to_string(&features).unwrap();
    let crippled: String = full
        .lines()
        .map(|l| {
            let mut parts: Vec<&str> = l.split(',').collect();
            parts.pop();
            parts.join(",") + "\n"
        })
        .collect();
    let crippled_path = tmp.path().join("crippled.csv");
    write(&crippled_path, &crippled);
    let out = run_in(
        tmp.path(),
        &[
            "detect",
            "--features",
            crippled_path.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--out",
            tmp.path().join("flags.csv").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("intl_presented_ratio"),
        "should name the missing column: {}",
        stderr(&out)
    );
}

#[test]
fn report_consolidates_and_checks_worlds() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, features) = make_world(tmp.path());
    let model = tmp.path().join("run/forest.model.json");
    assert_ok(&run_in(
        tmp.path(),
        &[
            "train",
            "--features",
            features.to_str().unwrap(),
            "--labels",
            world.join("labels.csv").to_str().unwrap(),
            "--model",
            "forest",
            "--out",
            model.to_str().unwrap(),
        ],
    ));
    assert_ok(&run_in(
        tmp.path(),
        &[
            "tcg",
            "--world",
            world.to_str().unwrap(),
            "--probes",
            "100",
            "--out",
            tmp.path().join("run/tcg.json").to_str().unwrap(),
        ],
    ));
    assert_ok(&run_in(
        tmp.path(),
        &[
            "report",
            "--run",
            tmp.path().join("run").to_str().unwrap(),
            "--out",
            tmp.path().join("run/report").to_str().unwrap(),
        ],
    ));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["campaigns"].as_array().unwrap().len(), 1);
    assert_eq!(report["models"].as_array().unwrap().len(), 1);

    // recall values match the source artifacts exactly
    let eval: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/forest.model.eval.json")).unwrap(),
    )
    .unwrap();
    let tcg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/tcg.json")).unwrap())
            .unwrap();
    let comparison = report["comparison"].as_array().unwrap();
    let tcg_row = comparison.iter().find(|r| r["method"].as_str().unwrap().starts_with("tcg")).unwrap();
    let ml_row = comparison.iter().find(|r| r["method"].as_str().unwrap().starts_with("forest")).unwrap();
    assert_eq!(tcg_row["recall"], tcg["detection_rate"]);
    assert_eq!(ml_row["recall"], eval["report"]["recall"]);
    assert_eq!(tcg_row["false_positives"], 0);
    assert!(tmp.path().join("run/report.txt").exists());
}

#[test]
fn report_on_empty_dir_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "report",
            "--run",
            tmp.path().join("empty").to_str().unwrap(),
            "--out",
            tmp.path().join("report").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nothing to report"));
}

#[test]
fn subcommands_never_mutate_their_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, features) = make_world(tmp.path());
    let cdr_digest = sha(&world.join("cdr.csv"));
    let features_digest = sha(&features);
    assert_ok(&run_in(
        tmp.path(),
        &[
            "train",
            "--features",
            features.to_str().unwrap(),
            "--labels",
            world.join("labels.csv").to_str().unwrap(),
            "--model",
            "svm",
            "--out",
            tmp.path().join("run/svm.model.json").to_str().unwrap(),
        ],
    ));
    assert_ok(&run_in(
        tmp.path(),
        &[
            "tcg",
            "--world",
            world.to_str().unwrap(),
            "--probes",
            "50",
            "--out",
            tmp.path().join("run/tcg.json").to_str().unwrap(),
            "--emit-probe-cdrs",
        ],
    ));
    assert_eq!(sha(&world.join("cdr.csv")), cdr_digest, "tcg must copy, not append");
    assert_eq!(sha(&features), features_digest);
}

#[test]
fn missing_input_file_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["featurize", "--cdr", "nope.csv", "--out", "f.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn clap_usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["simulate"]); // missing required flags
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(tmp.path(), &["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn featurize_pca_writes_scaler_and_components() {
    let tmp = tempfile::tempdir().unwrap();
    let (world, _) = make_world(tmp.path());
    let features = tmp.path().join("run/f.csv");
    assert_ok(&run_in(
        tmp.path(),
        &[
            "featurize",
            "--cdr",
            world.join("cdr.csv").to_str().unwrap(),
            "--out",
            features.to_str().unwrap(),
            "--pca",
            "3",
        ],
    ));
    let scaler: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("run/f.scaler.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(scaler["columns"][0], "total_calls");
    assert_eq!(scaler["mean"].as_array().unwrap().len(), 15);
    let pca: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/f.pca.json")).unwrap())
            .unwrap();
    assert_eq!(pca["components"].as_array().unwrap().len(), 3);
    assert_eq!(pca["explained_variance"].as_array().unwrap().len(), 3);
    let projected = std::fs::read_to_string(tmp.path().join("run/f.pca.csv")).unwrap();
    assert!(projected.starts_with("sim_id,pc1,pc2,pc3"));
    let feature_rows = std::fs::read_to_string(&features).unwrap().lines().count();
    assert_eq!(projected.lines().count(), feature_rows);

    // k out of range is a usage error
    let out = run_in(
        tmp.path(),
        &[
            "featurize",
            "--cdr",
            world.join("cdr.csv").to_str().unwrap(),
            "--out",
            tmp.path().join("run/g.csv").to_str().unwrap(),
            "--pca",
            "99",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}
