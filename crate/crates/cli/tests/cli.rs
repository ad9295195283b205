use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chaosbench_cli::{parse_config, parse_config_str, CliError, ExperimentKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chaosbench"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("CHAOSBENCH_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const CHECK: &str = r#"{
  "experiment": "check",
  "seed": 0,
  "lattice": { "dim": 1, "cutoff": 8 },
  "drift": { "kind": "convolution-gradient", "kappa": 1.0, "potential": [{ "mode": [1], "value": 0.25 }] },
  "functional": { "kind": "sobolev-dual-sq", "s": 1.0 },
  "initial": { "kind": "cosine", "terms": [{ "mode": [1], "amplitude": 0.4, "phase": 0.2 }] },
  "solver": { "dt": 0.02 },
  "check": { "t_list": [0.0, 0.5], "z_list": [[0.13], [0.41]], "rel_tol": RTOL }
}"#;

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let stem = path.file_stem().unwrap().to_str().unwrap();
        assert!(stem.starts_with(cfg.experiment.name()), "{stem}");
    }
}

#[test]
fn minimal_kuramoto_weak_error_config() {
    let cfg = parse_config(&configs().join("weak-error-kuramoto.json")).unwrap();
    assert_eq!(cfg.experiment, ExperimentKind::WeakError);
    let w = cfg.weak_error.as_ref().unwrap();
    assert!(w.crn && w.scale_replicas);
    assert_eq!(w.kuramoto_eta, 0.2);
}

#[test]
fn kappa_as_string_names_the_key() {
    let text = r#"{
  "experiment": "spectrum",
  "seed": 0,
  "lattice": { "dim": 1, "cutoff": 4 },
  "drift": { "kind": "kuramoto", "kappa": "2" }
}"#;
    match parse_config_str(text, "cfg.json") {
        Err(CliError::Config { path, line, .. }) => {
            assert_eq!(path, "drift.kappa");
            assert_eq!(line, 5);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn duplicate_and_unknown_keys_are_rejected() {
    let dup = r#"{"experiment": "spectrum", "seed": 0, "seed": 1, "lattice": {"dim": 1, "cutoff": 4},
                 "drift": {"kind": "kuramoto", "kappa": 2.0}}"#;
    let e = parse_config_str(dup, "dup").unwrap_err().to_string();
    assert!(e.contains("duplicate field `seed`"), "{e}");
    let unknown = r#"{"experiment": "spectrum", "seed": 0, "lattice": {"dim": 1, "cutoff": 4, "size": 3},
                     "drift": {"kind": "kuramoto", "kappa": 2.0}}"#;
    let e = parse_config_str(unknown, "unknown").unwrap_err().to_string();
    assert!(e.contains("lattice") && e.contains("unknown field `size`"), "{e}");
    let trailing = r#"{"experiment": "spectrum", "seed": 0, "lattice": {"dim": 1, "cutoff": 4},
                      "drift": {"kind": "kuramoto", "kappa": 2.0}} {}"#;
    assert!(parse_config_str(trailing, "trailing").is_err());
}

#[test]
fn missing_sections_fail_validation() {
    let text = r#"{"experiment": "weak-error", "seed": 0, "lattice": {"dim": 1, "cutoff": 4},
                  "drift": {"kind": "kuramoto", "kappa": 2.0}}"#;
    let e = parse_config_str(text, "x").unwrap_err().to_string();
    assert!(e.contains("functional"), "{e}");
}

#[test]
fn spectrum_prints_gap() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--kappa", "1", "--w1", "0.25", "--cutoff", "4", "--output", out.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let gap: f64 = stdout.lines().next().unwrap().trim_start_matches("gap = ").parse().unwrap();
    let want = 2.0 * std::f64::consts::PI.powi(2) * 1.5;
    assert!((gap - want).abs() < 1e-12 * want);
    assert!(stdout.contains("mode,eigenvalue"));
    assert!(out.path().join("spectrum-0000000000000000/spectrum.csv").exists());
}

#[test]
fn stationary_prints_json() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["stationary", "--kappa", "2", "--output", out.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let line = String::from_utf8(o.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert!((v["r"].as_f64().unwrap() - 0.831462).abs() < 1e-6);
    assert!(v["Z"].as_f64().unwrap() > 1.0);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
    let o = run(&["stationary", "--kappa", "0.9", "--output", out.path().to_str().unwrap()], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout[..o.stdout.iter().position(|&b| b == b'\n').unwrap()]).unwrap();
    assert_eq!(v["r"].as_f64(), Some(0.0));
}

#[test]
fn dry_run_computes_nothing() {
    let out = tempfile::tempdir().unwrap();
    let o = run(
        &["weak-error", configs().join("weak-error-hstable.json").to_str().unwrap(), "--dry-run", "--output", out.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("level N = 2048: 625 replicas"), "{stdout}");
    assert_eq!(std::fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let pass = write(dir.path(), "pass.json", &CHECK.replace("RTOL", "1e-3"));
    let o = run(&["check", pass.to_str().unwrap(), "--output", out], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let fail = write(dir.path(), "fail.json", &CHECK.replace("RTOL", "1e-300"));
    assert_eq!(run(&["check", fail.to_str().unwrap(), "--output", out], None).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", &CHECK.replace("RTOL", "\"tiny\""));
    let o = run(&["check", bad.to_str().unwrap(), "--output", out], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check.rel_tol"));
    // a config for another subcommand is an error
    assert_eq!(run(&["simulate", pass.to_str().unwrap(), "--output", out], None).status.code(), Some(1));
}

#[test]
fn outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "check.json", &CHECK.replace("RTOL", "1e-3"));
    let o = run(&["check", cfg.to_str().unwrap(), "--seed", "9", "--output", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let run_dir = dir.path().join("check-0000000000000009");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 9);
    assert_eq!(manifest["passed"], true);
    assert!(manifest["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    assert!(manifest["stages"].as_array().unwrap().len() >= 2);
    assert!(run_dir.join("checks.json").exists());
}

fn read_outputs(dir: &Path, files: &[&str]) -> Vec<Vec<u8>> {
    files.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn seeded_runs_are_reproducible_across_thread_counts() {
    let cfg = configs().join("simulate.json");
    let cfg = cfg.to_str().unwrap();
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, threads) in dirs.iter().zip(["1", "3", "1"]) {
        let seed = if d.path() == dirs[2].path() { "43" } else { "42" };
        let o = run(&["simulate", cfg, "--seed", seed, "--output", d.path().to_str().unwrap()], Some(threads));
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(dirs[0].path().join("simulate-000000000000002a/series.csv")).unwrap();
    let b = std::fs::read(dirs[1].path().join("simulate-000000000000002a/series.csv")).unwrap();
    let c = std::fs::read(dirs[2].path().join("simulate-000000000000002b/series.csv")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn weak_error_outputs_are_byte_identical() {
    let text = std::fs::read_to_string(configs().join("weak-error-kuramoto.json"))
        .unwrap()
        .replace("\"replicas\": 400", "\"replicas\": 24");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "weak.json", &text);
    let files = ["errors.csv", "fits.json"];
    let mut outs = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("out{threads}"));
        let o = run(&["weak-error", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()], Some(threads));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(read_outputs(&out.join("weak-error-000000000000000b"), &files));
    }
    assert_eq!(outs[0], outs[1]);
    let csv = String::from_utf8(outs[0][0].clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("N,t,estimate,std_error,pde_reference,abs_error"));
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
}

#[test]
fn nested_sections_report_the_full_path() {
    let text = r#"{
  "experiment": "check",
  "seed": 0,
  "lattice": { "dim": 1, "cutoff": 4 },
  "functional": {
    "kind": "mollified",
    "order": 2, "eps": 0.1, "nodes": 8,
    "inner": { "kind": "sobolev-dual-sq", "s": true }
  }
}"#;
    let e = parse_config_str(text, "nested.json").unwrap_err();
    assert!(e.to_string().starts_with("nested.json:8:"), "{e}");
    match e {
        CliError::Config { path, message, .. } => {
            assert_eq!(path, "functional.inner.s");
            assert!(message.contains("invalid type: boolean"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn tagged_sections_round_trip() {
    let cfg = parse_config(&configs().join("ergodic-decay.json")).unwrap();
    let text = serde_json::to_string(&cfg).unwrap();
    assert!(text.contains(r#""kind":"kuramoto""#), "{text}");
    assert_eq!(parse_config_str(&text, "round-trip").unwrap(), cfg);
}
