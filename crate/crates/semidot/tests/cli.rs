//! Black-box tests of the `semidot` binary: deterministic artifacts,
//! rate summaries, and machine-readable config errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn out_dir(tag: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{tag}"));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semidot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn solve_artifacts_are_deterministic() {
    let cfg = config("2d-random-8-sites.toml");
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (out_dir("solve-a"), out_dir("solve-b"));
    for dir in [&a, &b] {
        run_ok(&["solve", "--config", cfg, "--out", dir.to_str().unwrap(), "--seed", "3"]);
        for f in ["results.csv", "summary.json", "meta.json"] {
            assert!(dir.join(f).is_file(), "{f} missing");
        }
    }
    for f in ["results.csv", "summary.json"] {
        let (x, y) = (fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
        assert_eq!(x, y, "{f} differs between identical runs");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("meta.json")).unwrap()).unwrap();
    assert!(meta.is_object());
}

#[test]
fn rates_summary_reports_the_quadratic_slope() {
    let cfg = config("symmetric-1d.toml");
    let dir = out_dir("rates");
    run_ok(&["rates", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    let slope = summary["results"]["slope"].as_f64().expect("slope field");
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");

    let csv = fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(csv.lines().count() > 10, "sweep rows missing:\n{csv}");
}

#[test]
fn oracle_runs_on_the_symmetric_instance() {
    let cfg = config("symmetric-1d.toml");
    let dir = out_dir("oracle");
    run_ok(&["oracle", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["results"]["value"].is_number());
}

#[test]
fn overrides_change_the_run() {
    let cfg = config("symmetric-1d.toml");
    let dir = out_dir("set");
    run_ok(&[
        "entropic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--set",
        "experiment.eps=0.02",
    ]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["results"]["eps"].as_f64(), Some(0.02));
}

#[test]
fn invalid_config_is_rejected_with_the_field_named() {
    let base = fs::read_to_string(config("symmetric-1d.toml")).unwrap();
    let bad = base.replace(
        "density = \"uniform\"",
        "density = \"spline\"\nknots = [-1.0, 1.0]\nvalues = [0.5, 0.5]",
    );
    assert_ne!(base, bad, "fixture edit failed");
    let dir = out_dir("bad");
    fs::create_dir_all(&dir).unwrap();
    let bad_path = dir.join("bad.toml");
    fs::write(&bad_path, bad).unwrap();

    let out = run(&["solve", "--config", bad_path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let err: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap())
        .unwrap_or_else(|_| panic!("stderr is not a JSON record: {stderr}"));
    assert!(
        err["error"].as_str().unwrap().contains("density_min"),
        "error does not name the missing field: {stderr}"
    );
}

#[test]
fn missing_config_flag_errors() {
    let out = run(&["solve"]);
    assert!(!out.status.success());
}
