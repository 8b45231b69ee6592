use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robust-sparse")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn generate(dir: &Path, task: &str) -> String {
    let csv = dir.join(format!("{task}.csv"));
    let csv = csv.to_str().unwrap().to_owned();
    let out = cli(&[
        "generate",
        "--task",
        task,
        "--d",
        "20",
        "--k",
        "3",
        "--n",
        "5000",
        "--eps",
        "0.1",
        "--adversary",
        "sparse_shift",
        "--seed",
        "4",
        "--out",
        &csv,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    csv
}

#[test]
fn generate_then_run_each_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate(dir.path(), "mean");
    assert!(Path::new(&csv).exists());
    for estimator in ["paper", "baseline_single_direction", "classical", "coordinate-median"] {
        let out = cli(&["run", &csv, "--task", "mean", "--estimator", estimator]);
        assert_eq!(code(&out), 0, "{estimator}: {}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["schema"], 1);
        assert_eq!(report["cell"]["k"], 3);
        assert!(report["l2_error"].as_f64().unwrap().is_finite());
    }
    let log = std::fs::read_to_string(dir.path().join("mean.reports.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 4);
}

#[test]
fn run_accepts_config_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate(dir.path(), "regression");
    let report = dir.path().join("r.jsonl");
    let out = cli(&["run", &csv, "--task", "regression", "--config", "{}", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report.exists());
    let out = cli(&["run", &csv, "--task", "regression", "--config", "{not json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = generate(dir.path(), "pca");
    assert_eq!(code(&cli(&["run", &csv, "--task", "pca", "--estimator", "magic"])), 1);
    assert_eq!(code(&cli(&["run", &csv, "--task", "mean"])), 1);
    assert_eq!(code(&cli(&["run", &csv, "--task", "pca", "--estimator", "coordinate_median"])), 1);
    assert_eq!(code(&cli(&["generate", "--task", "mean"])), 1);
    assert_eq!(code(&cli(&["selftest", "--full", "--reduced"])), 1);
    assert_eq!(code(&cli(&["frobnicate"])), 1);
}

#[test]
fn missing_dataset_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(code(&cli(&["run", missing.to_str().unwrap(), "--task", "mean"])), 2);
}

#[test]
fn sweep_writes_outputs_and_rejects_empty_grids() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "task": "mean",
        "grid": [
            {"d": 16, "k": 2, "n": 3000, "epsilon": 0.05},
            {"d": 16, "k": 2, "n": 3000, "epsilon": 0.1}
        ],
        "adversary": "evasive_tail",
        "estimators": ["paper", "empirical_mean"],
        "seed": 3
    });
    let path = dir.path().join("spec.json");
    std::fs::write(&path, spec.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = cli(&["sweep", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.csv", "reports.jsonl", "paper.dat", "classical.dat", "plot.gp"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);

    let empty = serde_json::json!({"task": "mean", "grid": [], "estimators": ["paper"], "seed": 1});
    std::fs::write(&path, empty.to_string()).unwrap();
    assert_eq!(code(&cli(&["sweep", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])), 1);
}
