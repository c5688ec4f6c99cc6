use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindblad")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(out)).expect("valid JSON")
}

fn write_model(dir: &Path, name: &str, args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success());
    let path = dir.join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn certify_depolarizing_qubit() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "dep.json", &["scenario", "depolarizing", "--emit-model"]);
    let v = json(&run(&["certify", "--model", &model]));
    let r = &v["results"];
    assert!((r["gamma"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert_eq!(r["K"].as_f64().unwrap(), 1.0);
    assert_eq!(v["inputs"]["model_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "l3.json", &["scenario", "ladder3", "--emit-model"]);
    let a = run(&["certify", "--model", &model, "--seed", "7"]);
    let b = run(&["certify", "--model", &model, "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["results"]["method"], "mu2");
    assert!((v["results"]["gamma"].as_f64().unwrap() - (3.0 - 5f64.sqrt()) / 4.0).abs() < 1e-9);
    assert!((v["results"]["K"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "m.json", &["scenario", "ce1", "--emit-model"]);
    let go = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_lindblad"))
            .args(["certify", "--model", &model])
            .env("LINDBLAD_THREADS", n)
            .output()
            .unwrap()
    };
    let one = go("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, go("4").stdout);
    assert_eq!(json(&one)["results"]["method"], "none");
}

#[test]
fn emitted_models_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [
        ("ce1", vec!["scenario", "ce1", "--emit-model", "--with-hamiltonian"]),
        ("ce2", vec!["scenario", "ce2", "--emit-model"]),
        ("dep", vec!["scenario", "depolarizing", "--emit-model", "--gamma", "0.3"]),
    ] {
        let first = stdout(&run(&args));
        let path = dir.path().join(name);
        std::fs::write(&path, &first).unwrap();
        let spec = run(&["spectrum", "--model", path.to_str().unwrap()]);
        assert!(spec.status.success(), "{name}: {}", String::from_utf8_lossy(&spec.stderr));
    }
}

#[test]
fn ladder_scan_csv() {
    let out = run(&["ladder", "scan", "--family", "am", "--dmax", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,mu2"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (d, m) = l.split_once(',').unwrap();
            (d.parse().unwrap(), m.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![2, 3, 4, 5]);
    assert!(rows.iter().all(|r| r.1 < 0.0));
}

#[test]
fn perturbation_lemma_unit_prefactor() {
    let v = json(&run(&["perturb", "lemma", "--k", "1", "--gamma", "1", "--delta-l", "0.25"]));
    assert_eq!(v["results"]["gamma_tilde"].as_f64().unwrap(), 0.75);
    assert_eq!(v["results"]["limit"], "window_to_zero");
}

#[test]
fn ce1_series() {
    let out = run(&["scenario", "ce1", "--t-end", "50", "--samples", "11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,plus1,plus0,plus1_driven,plus0_driven");
    assert_eq!(lines.len(), 12);
    // Without the drive both states relax to the same stationary value 0.
    let last: Vec<f64> = lines[11].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[1] - last[2]).abs() < 1e-3);
    // With the drive the second qubit keeps its memory.
    assert!((last[3] - last[4]).abs() > 0.5);
}

#[test]
fn simulate_and_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "dep.json", &["scenario", "depolarizing", "--emit-model"]);
    let out = run(&["envelope", "--model", &model, "--rho", "ket:0", "--sigma", "ket:1", "--t-end", "1", "--samples", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    let v: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 2.0 * (-4.0f64).exp()).abs() < 1e-6);
    let sim = run(&["simulate", "--model", &model, "--initial", "0", "--observable", "Z", "--t-end", "1", "--samples", "2"]);
    assert!(sim.status.success());
    let last = stdout(&sim).lines().last().unwrap().to_string();
    let z: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((z - (-4.0f64).exp()).abs() < 1e-6);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = run(&["--out", path.to_str().unwrap(), "ladder", "c-alpha", "--min", "0.5", "--max", "1", "--steps", "2"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(path).unwrap().starts_with("alpha,c_alpha,certified\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Usage error.
    assert_eq!(run(&["certify"]).status.code(), Some(2));
    // Missing and malformed model files are input errors.
    assert_eq!(run(&["certify", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "jumps": [[[[0, 0], [1, 0]]]]}"#).unwrap();
    let out = run(&["certify", "--model", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("jumps"));
    // Invalid parameters.
    assert_eq!(run(&["perturb", "lemma", "--k", "0.5", "--gamma", "1", "--delta-l", "0.1"]).status.code(), Some(2));
    assert_eq!(
        Command::new(env!("CARGO_BIN_EXE_lindblad"))
            .args(["ladder", "scan", "--family", "ho", "--dmax", "3"])
            .env("LINDBLAD_THREADS", "zero")
            .output()
            .unwrap()
            .status
            .code(),
        Some(2)
    );
    // Failing to write the report is not the caller's fault.
    let out = run(&["--out", "/nonexistent/dir/out.csv", "ladder", "scan", "--family", "ho", "--dmax", "3"]);
    assert_eq!(out.status.code(), Some(1));
}
