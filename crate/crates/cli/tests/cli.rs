use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn tq(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tritronquee"))
        .args(args)
        .env("TRITRONQUEE_OUT", root)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn run_dir(root: &Path, command: &str) -> PathBuf {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with(&format!("{command}-")))
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn series_table_at_t0_is_sparse() {
    let root = tempfile::tempdir().unwrap();
    let o = tq(root.path(), &["series", "--max-n", "28"]);
    assert_eq!(code(&o), 0);
    let t = rows(&run_dir(root.path(), "series").join("coefficients.csv"));
    assert_eq!(t[0], ["n", "re_a", "im_a", "log10_abs_a", "phase"]);
    for r in &t[1..] {
        let n: usize = r[0].parse().unwrap();
        assert_eq!(r[1] != "0", n.is_multiple_of(7), "row {r:?}");
    }
}

#[test]
fn series_first_terms() {
    let root = tempfile::tempdir().unwrap();
    assert_eq!(code(&tq(root.path(), &["series", "--max-n", "0"])), 0);
    let t = rows(&run_dir(root.path(), "series").join("coefficients.csv"));
    assert_eq!(t.len(), 2);
    let a0: f64 = t[1][1].parse().unwrap();
    assert!((a0 + 6f64.cbrt()).abs() < 1e-15);

    let root = tempfile::tempdir().unwrap();
    assert_eq!(code(&tq(root.path(), &["series", "--t", "1,0", "--max-n", "4"])), 0);
    let t = rows(&run_dir(root.path(), "series").join("coefficients.csv"));
    let a2: f64 = t[3][1].parse().unwrap();
    assert!((a2 - 2.0 / a0).abs() < 1e-14);
}

#[test]
fn curve_point() {
    let root = tempfile::tempdir().unwrap();
    let o = tq(root.path(), &["curve", "--x", "1", "--arg", "0", "--t", "0"]);
    assert_eq!(code(&o), 0);
    let p: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((p["lambda5"][0].as_f64().unwrap() + 3.6342).abs() < 1e-4);
    assert!(p["lambda5"][1].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(json(&run_dir(root.path(), "curve").join("curve.json")), p);
}

#[test]
fn coefficient_asymptotics_report() {
    let root = tempfile::tempdir().unwrap();
    let o = tq(root.path(), &["coeff-asym", "--max-n", "350"]);
    assert_eq!(code(&o), 0);
    let r = json(&run_dir(root.path(), "coeff-asym").join("report.json"));
    assert_eq!(r["monotone"], true);
    assert_eq!(r["checkpoints"].as_array().unwrap().len(), 5);
}

#[test]
fn check_passes() {
    let root = tempfile::tempdir().unwrap();
    let o = tq(root.path(), &["check"]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(code(&o), 0, "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn solves_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--no-cache", "solve-line", "--preset", "U0-offset", "--b", "0.8i", "--nc", "128"];
    assert_eq!(code(&tq(a.path(), &args)), 0);
    assert_eq!(code(&tq(b.path(), &args)), 0);
    let (da, db) = (run_dir(a.path(), "solve-line"), run_dir(b.path(), "solve-line"));
    assert_eq!(da.file_name(), db.file_name());
    let csv = std::fs::read(da.join("solution.csv")).unwrap();
    assert_eq!(csv, std::fs::read(db.join("solution.csv")).unwrap());

    // the manifest alone is enough to redo the run
    let c = tempfile::tempdir().unwrap();
    let manifest = da.join("manifest.json");
    assert_eq!(code(&tq(c.path(), &["replay", manifest.to_str().unwrap()])), 0);
    let dc = run_dir(c.path(), "solve-line");
    assert_eq!(dc.file_name(), da.file_name());
    assert_eq!(csv, std::fs::read(dc.join("solution.csv")).unwrap());
    let m = json(&dc.join("manifest.json"));
    assert_eq!(m["job"]["config"]["domain"]["b"], serde_json::json!([0.0, 0.8]));
    assert_eq!(m["job"]["config"]["solver"]["max_iter"], 100);
}

#[test]
fn cached_solutions_are_bit_identical() {
    let root = tempfile::tempdir().unwrap();
    let args = ["solve-line", "--preset", "V0-imag", "--half-width", "10", "--nc", "128"];
    assert_eq!(code(&tq(root.path(), &args)), 0);
    let d = run_dir(root.path(), "solve-line");
    let first = std::fs::read(d.join("solution.csv")).unwrap();
    assert_eq!(json(&d.join("manifest.json"))["cache_hits"], serde_json::json!([]));
    assert_eq!(code(&tq(root.path(), &args)), 0);
    assert_eq!(json(&d.join("manifest.json"))["cache_hits"], serde_json::json!(["line"]));
    assert_eq!(first, std::fs::read(d.join("solution.csv")).unwrap());
}

#[test]
fn stokes_diff_reuses_the_line_solve() {
    let root = tempfile::tempdir().unwrap();
    let solve = ["solve-line", "--nc", "512", "--threshold", "1e-13"];
    assert_eq!(code(&tq(root.path(), &solve)), 0);
    assert_eq!(code(&tq(root.path(), &["stokes-diff"])), 0);
    let d = run_dir(root.path(), "stokes-diff");
    let m = json(&d.join("manifest.json"));
    assert_eq!(m["cache_hits"], serde_json::json!(["line"]));
    let s = &m["summary"];
    let rel = |a: &str, b: &str| (s[a].as_f64().unwrap() / s[b].as_f64().unwrap() - 1.0).abs();
    assert!(rel("rate", "predicted_rate") < 0.05);
    assert!(rel("period", "predicted_period") < 0.05);
    assert_eq!(rows(&d.join("difference.csv"))[0], ["abs_x", "difference", "minimal_term"]);
}

#[test]
fn small_sector() {
    let root = tempfile::tempdir().unwrap();
    let o = tq(root.path(), &["sector", "--preset", "typeII:0", "--n-rays", "8", "--n-r", "12", "--n-theta", "9", "--nc", "128"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = run_dir(root.path(), "sector");
    assert_eq!(rows(&d.join("field.csv")).len(), 1 + 12 * 9);
    let meta = json(&d.join("field.json"));
    assert!(meta["max_abs"].as_f64().unwrap() < 3.0 * 72f64.cbrt());
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-file");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!("out = {:?}\n[series]\nt = \"-1,0\"\nmax-n = 30\n", out.to_str().unwrap()),
    )
    .unwrap();
    let env_root = dir.path().join("from-env");
    let flag_root = dir.path().join("from-flag");

    // the environment beats the file, the flag beats both
    assert_eq!(code(&tq(&env_root, &["--config", cfg.to_str().unwrap(), "series", "--max-n", "7"])), 0);
    let m = json(&run_dir(&env_root, "series").join("manifest.json"));
    assert_eq!(m["job"]["config"]["max_n"], 7);
    assert_eq!(m["job"]["config"]["t"], serde_json::json!([-1.0, 0.0]));
    let args = ["--config", cfg.to_str().unwrap(), "--out", flag_root.to_str().unwrap(), "series"];
    assert_eq!(code(&tq(&env_root, &args)), 0);
    assert_eq!(json(&run_dir(&flag_root, "series").join("manifest.json"))["job"]["config"]["max_n"], 30);
    assert!(!out.exists());
}

#[test]
fn invalid_configurations_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[solve-line]\nncc = 3\n").unwrap();
    for args in [
        vec!["--config", cfg.to_str().unwrap(), "solve-line"],
        vec!["solve-line", "--arg-left", "0.5"],
        vec!["solve-line", "--t", "1,x"],
        vec!["sector", "--preset", "typeIII:0"],
        vec!["curve", "--x", "1", "--arg", "0", "--t", "0", "--bogus"],
    ] {
        let o = tq(dir.path(), &args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numerical_failures_exit_with_1() {
    let root = tempfile::tempdir().unwrap();
    let o = tq(root.path(), &["solve-line", "--nc", "64", "--max-iter", "1"]);
    assert_eq!(code(&o), 1);
    let d = run_dir(root.path(), "solve-line");
    let e = json(&d.join("error.json"));
    assert_eq!(e["error"], "NoConvergence");
    assert_eq!(e["history"].as_array().unwrap().len(), 2);
    assert_eq!(json(&d.join("manifest.json"))["status"], "failed");
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["exit_code"], 1);
}
