use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn waveqft() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_waveqft"));
    c.env_remove("WAVEQFT_THREADS").env_remove("WAVEQFT_MEM_CAP_GB");
    c
}

fn run(args: &[&str]) -> Output {
    waveqft().args(args).output().expect("binary runs")
}

fn error_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn recipes() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn eight_mode_entropy_scan_is_fast() {
    let t = Instant::now();
    let out = run(&["fermion", "entropy-scan", "--x", "1", "--n", "3", "--k", "3", "--m0", "1e-8", "--bc", "antiperiodic"]);
    assert!(t.elapsed() < Duration::from_secs(1));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,v,size,fraction,entropy_bits"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let s = row.rsplit(',').next().unwrap();
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{s}");
    }
}

#[test]
fn identical_configs_give_identical_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let mut sums = Vec::new();
    for (i, threads) in ["1", "2"].iter().enumerate() {
        let csv = dir.path().join(format!("run{i}.csv"));
        let out = run(&[
            "--threads", threads, "boson", "entropy-scan", "--x", "8", "--n", "2", "--sizes", "1..31", "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let m = read_json(&dir.path().join(format!("run{i}.csv.manifest.json")));
        assert_eq!(m["points"].as_array().unwrap().len(), 31);
        assert_eq!(m["config"]["threads"], Value::String(threads.to_string()));
        sums.push((m["outputs"][0]["sha256"].as_str().unwrap().to_string(), std::fs::read(&csv).unwrap()));
    }
    assert_eq!(sums[0], sums[1]);
}

#[test]
fn unknown_flags_are_errors() {
    let out = run(&["fermion", "entropy-scan", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["code"], "cli.usage");
    assert!(out.stdout.is_empty());
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"command": "fermion entropy-scan", "x": 2, "k": 2, "sizes": [1, 2, 3]}"#).unwrap();
    let out = run(&["fermion", "entropy-scan", "--config", cfg.to_str().unwrap(), "--k", "4", "--dry-run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echo: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c = &echo["config"];
    assert_eq!(c["k"], "4");
    assert_eq!(c["x"], "2");
    assert_eq!(c["sizes"], "1,2,3");
    assert_eq!(c["bc"], "antiperiodic");
    assert_eq!(echo["command"], "fermion entropy-scan");
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"x": 2, "colour": "red"}"#).unwrap();
    let out = run(&["fermion", "entropy-scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["field"], "colour");

    std::fs::write(&cfg, r#"{"command": "eop-scan"}"#).unwrap();
    let out = run(&["mi-compress", "--config", cfg.to_str().unwrap()]);
    assert_eq!(error_json(&out)["error"]["field"], "command");

    let out = run(&["mi-compress", "--levels", "5..2", "--dry-run"]);
    assert_eq!(error_json(&out)["error"]["field"], "levels");
}

#[test]
fn core_errors_keep_their_codes() {
    let out = run(&["stencil", "--k", "2", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["code"], "stencil.no_valid_stencil");

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("b.bin");
    let out = waveqft()
        .env("WAVEQFT_MEM_CAP_GB", "1e-6")
        .args(["boson", "covariance", "--x", "64", "--n", "1", "--bc", "open", "--out", p.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(error_json(&out)["error"]["code"], "boson.memory_cap");
}

#[test]
fn binary_covariance_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.bin");
    let out = run(&["fermion", "covariance", "--x", "2", "--n", "2", "--k", "3", "--m0", "0.2", "--out", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let side = read_json(&dir.path().join("g.bin.json"));
    assert_eq!(side["endianness"], "little");
    assert_eq!(side["dtype"], "f64");
    assert_eq!(side["shape"], serde_json::json!([8, 8]));
    assert_eq!(side["lattice"]["v"], 8);
    assert_eq!(side["lattice"]["bc"], "antiperiodic");
    let bytes = std::fs::read(&p).unwrap();
    let g: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(g.len(), 64);
    // Γ⁰¹ of a pure state is orthogonal.
    for i in 0..8 {
        for j in 0..8 {
            let dot: f64 = (0..8).map(|k| g[k * 8 + i] * g[k * 8 + j]).sum();
            assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    let m = read_json(&dir.path().join("g.bin.manifest.json"));
    assert_eq!(m["outputs"][0]["sha256"], side["sha256"]);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn covariance_needs_a_file() {
    let out = run(&["fermion", "covariance", "--x", "2", "--n", "1"]);
    assert_eq!(error_json(&out)["error"]["field"], "out");
}

#[test]
fn every_recipe_resolves() {
    let all = recipes();
    assert!(all.len() >= 10);
    for path in all {
        let cfg = read_json(&path);
        let command = cfg["command"].as_str().unwrap().to_string();
        let mut args: Vec<&str> = command.split(' ').collect();
        args.extend(["--config", path.to_str().unwrap(), "--dry-run"]);
        let out = run(&args);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn small_recipe_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let recipe = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/power-law-fermion-k3.json");
    let csv = dir.path().join("p.csv");
    let out = run(&["correlator-scan", "--config", recipe.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,l,numeric,analytic\n"));
    assert_eq!(text.lines().count(), 1 + (16 << 4));
}

#[test]
fn json_tables() {
    let out = run(&["filters", "--k", "1", "--json"]);
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[1]["g"], -std::f64::consts::FRAC_1_SQRT_2);
}

#[test]
fn dwt_reads_a_signal() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("v.csv");
    std::fs::write(&input, "value\n1\n1\n1\n1\n1\n1\n1\n1\n").unwrap();
    let out = run(&["dwt", "--in", input.to_str().unwrap(), "--k", "2", "--levels", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for row in text.lines().skip(1).filter(|r| r.starts_with("wavelet")) {
        let v: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v.abs() < 1e-12);
    }
}
