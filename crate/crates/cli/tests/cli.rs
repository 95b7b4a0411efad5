use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sera(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sera"))
        .args(args)
        .env_remove("SERA_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn unit(i: usize, k: f64) -> f64 {
    let v = ((i as f64 + 1.0) * k).sin() * 43758.5453;
    v - v.floor()
}

/// Right-skewed target driven by two numeric features and one nominal one.
fn skewed_csv(dir: &Path, rows: usize) -> PathBuf {
    let mut text = String::from("a,b,site,y\n");
    for i in 0..rows {
        let (a, b) = (unit(i, 12.9898), unit(i, 78.233));
        let site = ["north", "south", "east"][i % 3];
        let bump = if site == "east" { 0.3 } else { 0.0 };
        let y = (2.5 * a + b + bump + 0.5 * unit(i, 39.425)).exp();
        text.push_str(&format!("{a},{b},{site},{y}\n"));
    }
    let path = dir.join("skewed.csv");
    fs::write(&path, text).unwrap();
    path
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{"grid": {"nrounds": [20], "max_depth": [2], "eta": [0.1, 0.3]}, "folds": 3, "bayes_samples": 10000}"#,
    )
    .unwrap();
    path
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = sera(&["profile", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_fails_with_diagnostic() {
    let out = sera(&["profile", "--data", "/nonexistent/file.csv", "--target", "y"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn missing_target_column_fails() {
    let dir = tempfile::tempdir().unwrap();
    let data = skewed_csv(dir.path(), 50);
    let out = sera(&["profile", "--data", data.to_str().unwrap(), "--target", "nope"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn profile_without_rare_rows_reports_zero_ir() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    let text: String = std::iter::once("x,y\n".to_owned())
        .chain((1..=100).map(|i| format!("{},{i}\n", i % 7)))
        .collect();
    fs::write(&path, text).unwrap();
    let out = sera(&["profile", "--data", path.to_str().unwrap(), "--target", "y"]);
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let v = stdout_json(&out);
    assert_eq!(v["n_rare"], 0);
    assert!(stdout.contains("\"ir\": 0.0"), "{stdout}");
    assert_eq!(v["n_rows"], 100);
}

#[test]
fn profile_counts_columns_and_respects_type_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = skewed_csv(dir.path(), 120);
    let data = data.to_str().unwrap();
    let v = stdout_json(&sera(&["profile", "--data", data, "--target", "y"]));
    assert_eq!(v["n_nominal"], 1);
    assert_eq!(v["n_numeric"], 2);
    let v = stdout_json(&sera(&["profile", "--data", data, "--target", "y", "--type", "low"]));
    assert_eq!(v["extreme_type"], "low");
}

#[test]
fn relevance_curve_spans_padded_range() {
    let dir = tempfile::tempdir().unwrap();
    let data = skewed_csv(dir.path(), 100);
    let out_path = dir.path().join("phi.csv");
    let out = sera(&[
        "relevance",
        "--data",
        data.to_str().unwrap(),
        "--target",
        "y",
        "--points",
        "41",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y,phi"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 41);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    assert!(rows.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
}

#[test]
fn tune_prints_best_cv_result() {
    let dir = tempfile::tempdir().unwrap();
    let data = skewed_csv(dir.path(), 150);
    let grid = dir.path().join("grid.json");
    fs::write(&grid, r#"{"nrounds": [10, 20], "max_depth": [2], "eta": [0.3]}"#).unwrap();
    let v = stdout_json(&sera(&[
        "tune",
        "--data",
        data.to_str().unwrap(),
        "--target",
        "y",
        "--objective",
        "sera",
        "--grid",
        grid.to_str().unwrap(),
        "--folds",
        "3",
        "--seed",
        "4",
    ]));
    let folds = v["fold_scores_sera"].as_array().unwrap();
    assert_eq!(folds.len(), 3);
    let mean = folds.iter().map(|f| f.as_f64().unwrap()).sum::<f64>() / 3.0;
    assert!((mean - v["mean_sera"].as_f64().unwrap()).abs() <= 1e-12 * mean.abs());
    assert_eq!(v["workflow"]["objective"], "sera");
}

#[test]
fn experiment_writes_record_and_files_then_compare_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let data = skewed_csv(dir.path(), 200);
    let config = small_config(dir.path());
    let mut records = Vec::new();
    for seed in ["1", "2"] {
        let out_dir = dir.path().join(format!("run{seed}"));
        let v = stdout_json(&sera(&[
            "experiment",
            "--data",
            data.to_str().unwrap(),
            "--target",
            "y",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ]));
        assert!(v["gbm_mse"]["sera"].is_number());
        assert!(v["gbm_sera"]["mse"].is_number());
        let record: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("experiment.json")).unwrap()).unwrap();
        assert_eq!(record["seed"].as_u64(), Some(seed.parse().unwrap()));
        assert_eq!(record["n_train"], 160);
        assert_eq!(record["n_test"], 40);
        for model in ["gbm_mse", "gbm_sera"] {
            let pred = fs::read_to_string(out_dir.join(format!("predictions_{model}.csv"))).unwrap();
            assert!(pred.starts_with("row_id,y,yhat"));
            assert_eq!(pred.lines().count(), 41);
            let curve = fs::read_to_string(out_dir.join(format!("curve_{model}.csv"))).unwrap();
            assert!(curve.starts_with("t,ser"));
        }
        records.push(out_dir.join("experiment.json"));
    }

    let v = stdout_json(&sera(&[
        "compare",
        "--records",
        records[0].to_str().unwrap(),
        records[1].to_str().unwrap(),
        "--metric",
        "mse",
        "--seed",
        "3",
        "--samples",
        "10000",
    ]));
    let total: f64 = ["p_left", "p_rope", "p_right"].iter().map(|k| v[k].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() <= 1e-9);
}

#[test]
fn compare_rejects_non_record_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{}").unwrap();
    let out = sera(&["compare", "--records", bad.to_str().unwrap(), "--metric", "sera"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn deriv_check_closed_form_matches_direct() {
    let dir = tempfile::tempdir().unwrap();
    let data = skewed_csv(dir.path(), 300);
    let v = stdout_json(&sera(&[
        "deriv-check",
        "--data",
        data.to_str().unwrap(),
        "--target",
        "y",
        "--seed",
        "0",
        "--probes",
        "10",
    ]));
    assert!(v["grad_max_abs_diff"].as_f64().unwrap() <= 1e-9, "{v}");
    assert!(v["hess_max_abs_diff"].as_f64().unwrap() <= 1e-9, "{v}");
    assert!(v["fd_grad_max_rel_err"].as_f64().unwrap() <= 1e-5, "{v}");
    assert!(v["time_closed_form_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn bad_thread_setting_fails() {
    let dir = tempfile::tempdir().unwrap();
    let data = skewed_csv(dir.path(), 60);
    let out = Command::new(env!("CARGO_BIN_EXE_sera"))
        .args(["tune", "--data", data.to_str().unwrap(), "--target", "y", "--objective", "mse"])
        .env("SERA_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
