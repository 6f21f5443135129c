use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TORUS12_THREE_BOND: &str = r#"{
  "boundary": {"kind": "torus", "m": 12, "n": 12},
  "perturbation": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "A"}}
}"#;

fn run(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{cmd}-config.json"));
    std::fs::write(&cfg, config).unwrap();
    run_with(dir, cmd, &cfg, extra, None)
}

fn run_with(dir: &Path, cmd: &str, cfg: &Path, extra: &[&str], workers: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_diracwalk"));
    c.arg(cmd).arg("--config").arg(cfg).arg("--out").arg(dir.join("out")).args(extra);
    c.env_remove("DIRACWALK_WORKERS");
    if let Some(w) = workers {
        c.env("DIRACWALK_WORKERS", w);
    }
    c.output().unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
}

fn out(dir: &Path, name: &str) -> PathBuf {
    dir.join("out").join(name)
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out(dir, name)).unwrap()).unwrap()
}

#[test]
fn lattice_files() {
    let d = TempDir::new().unwrap();
    ok(&run(d.path(), "lattice", r#"{"boundary": {"kind": "torus", "m": 12, "n": 12}}"#, &[]));
    assert_eq!(json(d.path(), "lattice.json")["n_sites"], 288);
    let cfg = r#"{"name": "zz", "boundary": {"kind": "sheet", "n_x": 10, "n_y": 10, "edge": "zigzag"}}"#;
    ok(&run(d.path(), "lattice", cfg, &[]));
    let v = json(d.path(), "zz.json");
    assert_eq!(v["n_sites"], 218);
    assert!(!v["edges"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_config_names_the_field() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), "lattice", r#"{"boundary": {"kind": "torus", "m": 3, "n": 3}, "gama": 1}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gama"));
    let o = run(d.path(), "lattice", r#"{"boundary": {"kind": "torus", "m": 0, "n": 3}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_with(d.path(), "lattice", &d.path().join("missing.json"), &[], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_perturbation_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), "search", r#"{"boundary": {"kind": "torus", "m": 6, "n": 6}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("perturbation"));
}

#[test]
fn numerical_failure_exit_code() {
    // no Dirac points: the quantization condition has no root
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 10, "n": 10},
                 "perturbation": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "A"}}}"#;
    let o = run(d.path(), "theory", cfg, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_worker_count() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(&cfg, r#"{"boundary": {"kind": "torus", "m": 3, "n": 3}}"#).unwrap();
    assert_eq!(run_with(d.path(), "lattice", &cfg, &[], Some("zero")).status.code(), Some(2));
    assert_eq!(run_with(d.path(), "lattice", &cfg, &["--workers", "0"], None).status.code(), Some(2));
    ok(&run_with(d.path(), "lattice", &cfg, &["--workers", "1"], Some("2")));
}

#[test]
fn sweep_outputs() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 6, "n": 6},
                 "perturbation": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "A"}},
                 "gamma_grid": {"min": 0.0, "max": 1.5, "points": 301}}"#;
    ok(&run(d.path(), "sweep", cfg, &["--grid", "11"]));
    let csv = std::fs::read_to_string(out(d.path(), "sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "gamma,level_index,eigenvalue");
    assert_eq!(csv.lines().count(), 1 + 11 * 72);
    assert!(std::fs::read_to_string(out(d.path(), "sweep.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn empty_gamma_grid_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 6, "n": 6},
                 "perturbation": {"kind": "single_bond", "cell": [0, 0]}, "gamma_grid": []}"#;
    assert_eq!(run(d.path(), "sweep", cfg, &[]).status.code(), Some(2));
}

#[test]
fn search_reports_peak() {
    let d = TempDir::new().unwrap();
    ok(&run(d.path(), "search", TORUS12_THREE_BOND, &["--grid", "300"]));
    let v = json(d.path(), "search.json");
    let p = v["peak_probability"].as_f64().unwrap();
    assert!((0.40..=0.50).contains(&p), "{p}");
    assert_eq!(v["config"]["boundary"]["m"], 12);
    assert_eq!(v["series_peaks"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(out(d.path(), "search.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "time,B(0,0),B(11,0),B(11,1),total");
    assert_eq!(csv.lines().count(), 301);
}

#[test]
fn search_all_optimal_starts() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 6, "n": 6}, "start": "all_optimal",
                 "perturbation": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "A"}}}"#;
    ok(&run(d.path(), "search", cfg, &["--grid", "100"]));
    assert_eq!(json(d.path(), "search.json")["runs"].as_array().unwrap().len(), 6);
    assert!(out(d.path(), "search_5.csv").exists());
}

#[test]
fn outputs_are_deterministic() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 6, "n": 6},
                 "perturbation": {"kind": "single_bond", "cell": [1, 1]}, "start": "odd"}"#;
    ok(&run(d.path(), "search", cfg, &[]));
    let first: Vec<Vec<u8>> =
        ["search.csv", "search.json", "search.svg"].iter().map(|f| std::fs::read(out(d.path(), f)).unwrap()).collect();
    ok(&run(d.path(), "search", cfg, &["--workers", "3"]));
    for (f, a) in ["search.csv", "search.json", "search.svg"].iter().zip(first) {
        assert_eq!(std::fs::read(out(d.path(), f)).unwrap(), a, "{f} differs");
    }
}

#[test]
fn comm_equivalent_pair() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 12, "n": 12},
                 "perturbation": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "A"}},
                 "target": {"kind": "three_bond", "site": {"alpha": 3, "beta": 3, "sublattice": "A"}}}"#;
    ok(&run(d.path(), "comm", cfg, &[]));
    let v = json(d.path(), "comm.json");
    assert_eq!(v["pair_class"], "equivalent");
    let frac = v["target_peak_probability"].as_f64().unwrap() / v["initial_source_probability"].as_f64().unwrap();
    assert!(frac >= 0.9);
    let csv = std::fs::read_to_string(out(d.path(), "comm.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "time,source,target,total");
}

#[test]
fn comm_rejects_adjacent_pair() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 6, "n": 6},
                 "perturbation": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "A"}},
                 "target": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "B"}}}"#;
    assert_eq!(run(d.path(), "comm", cfg, &[]).status.code(), Some(2));
}

#[test]
fn scaling_outputs() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 6, "n": 6}, "sizes": [6, 9, 12, 15, 18]}"#;
    ok(&run(d.path(), "scaling", cfg, &[]));
    let csv = std::fs::read_to_string(out(d.path(), "scaling.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "N,gap,fit1,fit2");
    assert_eq!(csv.lines().count(), 6);
    let v = json(d.path(), "scaling.json");
    assert!(v["residual2"].as_f64().unwrap() < v["residual1"].as_f64().unwrap());
    let bad = r#"{"boundary": {"kind": "torus", "m": 6, "n": 6}, "sizes": [6, 9, 12]}"#;
    assert_eq!(run(d.path(), "scaling", bad, &[]).status.code(), Some(2));
}

#[test]
fn reduced_models() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 12, "n": 12},
                 "perturbation": {"kind": "three_bond", "site": {"alpha": 0, "beta": 0, "sublattice": "A"}},
                 "target": {"kind": "three_bond", "site": {"alpha": 1, "beta": 0, "sublattice": "A"}}}"#;
    ok(&run(d.path(), "reduced", cfg, &[]));
    let v = json(d.path(), "reduced.json");
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 3);
    let t = models[0]["predicted_peak_time"].as_f64().unwrap();
    assert!((t - std::f64::consts::PI / 4.0 * 96f64.sqrt()).abs() < 1e-9);
    assert_eq!(models[2]["kind"], "comm_non_equivalent");
}

#[test]
fn theory_report() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"boundary": {"kind": "torus", "m": 12, "n": 12}, "sizes": [6, 9, 12, 15]}"#;
    ok(&run(d.path(), "theory", cfg, &[]));
    let v = json(d.path(), "theory.json");
    let (root, eig) = (v["E_plus_root"].as_f64().unwrap(), v["E_plus_eigen"].as_f64().unwrap());
    assert!((root - eig).abs() < 1e-8);
    assert_eq!(v["log_bounds"]["rows"].as_array().unwrap().len(), 4);
}
