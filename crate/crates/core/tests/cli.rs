//! The `density-lab` binary: exit codes, validation, determinism and outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_density-lab"));
    c.env_remove("RUST_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn preset_json(name: &str, params: &[&str]) -> Value {
    let mut args = vec!["preset", name, "--print-config"];
    for p in params {
        args.extend(["--param", p]);
    }
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("config is json")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run_preset(name: &str, params: &[&str], out: &Path) -> Output {
    let mut args = vec!["preset", name, "--out", out.to_str().unwrap()];
    for p in params {
        args.extend(["--param", p]);
    }
    run(&args)
}

fn csv_rows(path: &Path) -> Vec<(usize, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["size", "error"]);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect()
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries.map(|e| e.unwrap().path()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

#[test]
fn list_presets_names_every_preset() {
    let out = run(&["list-presets"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in density_lab::experiment::preset_experiments().iter().map(|p| p.name) {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn check_accepts_preset_configs() {
    let tmp = TempDir::new().unwrap();
    for name in ["hermite_l2", "cm_zero_obstruction", "gaussian_translates_schwartz"] {
        let path = write_config(tmp.path(), &format!("{name}.json"), &preset_json(name, &[]));
        let out = run(&["check", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn floor_weight_in_cm_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_json("cm_zero_obstruction", &[]);
    cfg["weight"] = serde_json::json!({"expression": "floor(x^2+2)*exp(-x^2)"});
    let path = write_config(tmp.path(), "bad.json", &cfg);
    for sub in ["check", "run"] {
        let out = run(&[sub, path.to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{sub}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("smooth-weight"));
    }
}

#[test]
fn unknown_key_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_json("prop210_check", &[]);
    cfg["space"]["colour"] = Value::String("blue".into());
    let path = write_config(tmp.path(), "bad.json", &cfg);
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn bad_preset_arguments_are_validation_errors() {
    assert_eq!(code(&run(&["preset", "no_such_preset"])), 2);
    assert_eq!(code(&run(&["preset", "hermite_lp", "--param", "q=3"])), 2);
    assert_eq!(code(&run(&["preset", "hermite_lp", "--param", "p=0.5"])), 2);
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("missing.json");
    assert_eq!(code(&run(&["check", missing.to_str().unwrap()])), 2);
}

#[test]
fn overflowing_target_is_a_numerical_failure() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_json("hermite_l2", &[]);
    cfg["targets"] = serde_json::json!(["exp(x^2)"]);
    let path = write_config(tmp.path(), "overflow.json", &cfg);
    let out = run(&["run", path.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn passing_preset_exits_zero_without_plotdata() {
    let tmp = TempDir::new().unwrap();
    let out = run_preset("prop210_check", &[], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], Value::Bool(true));
    assert!(tmp.path().join("timings.json").exists());
    assert!(csv_files(&tmp.path().join("plotdata")).is_empty());
    assert!(csv_files(&tmp.path().join("tables")).is_empty());
}

#[test]
fn unmet_criterion_exits_one_and_reports_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let first = run_preset("hermite_l2", &[], a.path());
    assert_eq!(code(&first), 1, "{}", String::from_utf8_lossy(&first.stdout));
    assert!(String::from_utf8_lossy(&first.stdout).contains("FAIL"));
    let second = bin()
        .env("DENSITY_LAB_THREADS", "1")
        .args(["preset", "hermite_l2", "--out", b.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&second), 1);
    let ra = fs::read(a.path().join("report.json")).unwrap();
    let rb = fs::read(b.path().join("report.json")).unwrap();
    assert!(ra == rb, "report.json differs between runs");
    for sub in ["tables", "plotdata"] {
        let fa = csv_files(&a.path().join(sub));
        let fb = csv_files(&b.path().join(sub));
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
        }
    }

    let plots = csv_files(&a.path().join("plotdata"));
    assert_eq!(plots.len(), 1, "{plots:?}");
    let rows = csv_rows(&plots[0]);
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![5, 10, 20, 40]);
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1), "{rows:?}");
}

#[test]
fn closure_comparison_writes_matched_plot_series() {
    let tmp = TempDir::new().unwrap();
    let out = run_preset("closure_compare", &["weight=gaussian"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let plots = csv_files(&tmp.path().join("plotdata"));
    assert_eq!(plots.len(), 2, "{plots:?}");
    let sizes: Vec<Vec<usize>> = plots
        .iter()
        .map(|p| csv_rows(p).into_iter().map(|r| r.0).collect())
        .collect();
    assert_eq!(sizes[0], sizes[1]);
    assert_eq!(sizes[0], vec![5, 9, 17, 33]);
}

#[test]
fn run_uses_config_output_dir_unless_overridden() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_json("lemma212_check", &[]);
    let target = tmp.path().join("from-config");
    cfg["output"]["dir"] = Value::String(target.to_str().unwrap().into());
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(target.join("report.json").exists());
}
