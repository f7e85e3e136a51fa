use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const SHEAR: &str = r#"{"d": 1, "rows": [[1, 1], [1, 2]]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symsector"))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], inputs: &[&Path]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for p in inputs {
        cmd.arg("--input").arg(p);
    }
    cmd.output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn shear_sequence(n: usize) -> String {
    let maps: Vec<Value> = (0..n)
        .map(|_| json!({"d": 1, "rows": [[1.0, 1.0], [1.0, 2.0]]}))
        .collect();
    json!({"maps": maps}).to_string()
}

#[test]
fn sigma_reports_least_expansion() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.json", SHEAR);
    let out = run(&["sigma", "--no-timestamp"], &[&l]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((f(&v["t1"]) - 1.0).abs() <= 1e-12);
    assert!((f(&v["sigma"]) - (1.0 + 2f64.sqrt())).abs() <= 1e-12);
    assert!(v.get("timestamp").is_none());
}

#[test]
fn timestamp_is_added_by_default() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.json", SHEAR);
    let v = json_of(&run(&["check"], &[&l]));
    assert!(v["timestamp"].as_u64().is_some());
}

#[test]
fn check_classifies_identity_and_shear() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", r#"[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]"#);
    let v = json_of(&run(&["check", "--no-timestamp"], &[&id]));
    assert_eq!(v["class"], "Monotone");
    assert_eq!(v["symplectic"], true);
    let l = write(&dir, "l.json", SHEAR);
    let v = json_of(&run(&["check", "--no-timestamp"], &[&l]));
    assert_eq!(v["class"], "StrictlyMonotone");
}

#[test]
fn check_reports_non_symplectic_without_class() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", "[[2, 0], [0, 1]]");
    let out = run(&["check", "--no-timestamp"], &[&m]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["symplectic"], false);
    assert!(v["class"].is_null());
}

#[test]
fn factor_of_non_symplectic_exits_with_validation_error() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", "[[2, 0], [0, 1]]");
    let out = run(&["factor"], &[&m]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    assert_eq!(v["error"]["kind"], "NotSymplectic");
    assert!(v["error"]["message"].as_str().is_some());
}

#[test]
fn malformed_input_exits_with_validation_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{not json");
    let out = run(&["sigma"], &[&bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json_of(&out)["error"]["kind"].is_string());
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["sigma"], &[&missing]).status.code(), Some(2));
    assert_eq!(run(&["sigma"], &[]).status.code(), Some(2));
}

#[test]
fn analyze_csv_diameters_follow_t1() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "seq.json", &shear_sequence(10));
    let out = run(&["analyze", "--format", "csv"], &[&seq]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,sigma_n,t1_n,diameter_n,q_probe_0");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    let sigma = 1.0 + 2f64.sqrt();
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0] as usize, k + 1);
        let t1 = row[2];
        let expect = 0.5 * (1.0 + 1.0 / t1).ln();
        assert!((row[3] - expect).abs() <= 1e-9 * (1.0 + expect));
        assert!(row[1] >= sigma.powi(k as i32 + 1) * (1.0 - 1e-9));
    }
}

#[test]
fn analyze_flags_conditioning_stop() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "seq.json", &shear_sequence(30));
    let out = run(&["analyze", "--no-timestamp"], &[&seq]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_of(&out);
    let stop = v["flags"]["conditioning_stop"].as_u64().unwrap() as usize;
    assert!(stop < 30);
    assert_eq!(v["steps"].as_array().unwrap().len(), stop);
    assert_eq!(v["verdict"]["kind"], "CertifiedGrowth");
}

#[test]
fn n_max_limits_the_horizon() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "seq.json", &shear_sequence(10));
    let v = json_of(&run(&["analyze", "--no-timestamp", "--n-max", "2"], &[&seq]));
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);
    assert_eq!(v["verdict"]["kind"], "NoVerdict");
}

#[test]
fn output_is_deterministic_without_timestamp() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.json", SHEAR);
    let args = ["sigma", "--no-timestamp", "--samples", "2000", "--seed", "7"];
    let a = run(&args, &[&l]);
    let b = run(&args, &[&l]);
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert_eq!(v["oracle"]["within_band"], true);
}

#[test]
fn output_flag_writes_the_report() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.json", SHEAR);
    let target = dir.path().join("report.json");
    let out = bin()
        .args(["canon", "--no-timestamp", "--input"])
        .arg(&l)
        .arg("--output")
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert!((f(&v["t"][0]) - 1.0).abs() <= 1e-10);
    assert!(f(&v["residual"]) <= 1e-9);
}

#[test]
fn mobius_output_feeds_dist() {
    let dir = TempDir::new().unwrap();
    let l = write(&dir, "l.json", SHEAR);
    let subs = write(
        &dir,
        "subs.json",
        r#"{"subspaces": [[[1], [0]], [[0], [1]], {"d": 1, "rows": [[2]]}]}"#,
    );
    let images = run(&["mobius", "--no-timestamp"], &[&l, &subs]);
    assert_eq!(images.status.code(), Some(0));
    let img = write(&dir, "img.json", std::str::from_utf8(&images.stdout).unwrap());
    let out = run(&["dist", "--no-timestamp"], &[&img]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let d = &v["distances"];
    // images of V1 and V2 under the shear are graphs 1 and 2
    assert!((f(&d[0][1]) - 0.5 * 2f64.ln()).abs() <= 1e-12);
    assert_eq!(f(&d[0][0]), 0.0);
}

#[test]
fn dist_rejects_boundary_subspaces() {
    let dir = TempDir::new().unwrap();
    let subs = write(&dir, "subs.json", r#"{"subspaces": [[[1], [0]], [[1]]]}"#);
    let out = run(&["dist"], &[&subs]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["error"]["kind"], "NotInLagC");
}

#[test]
fn infinite_diameters_are_reported_as_strings() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "seq.json", r#"{"maps": [[[1, 0], [0, 1]]]}"#);
    let v = json_of(&run(&["analyze", "--no-timestamp"], &[&seq]));
    assert_eq!(v["steps"][0]["diameter_n"], "+inf");
    let out = run(&["analyze", "--format", "csv"], &[&seq]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().split(',').nth(3) == Some("+inf"));
}

#[test]
fn gen69_output_feeds_analyze() {
    let dir = TempDir::new().unwrap();
    let n = 12;
    let ones: Vec<Value> = (0..n).map(|_| json!([[1.0]])).collect();
    let zeros: Vec<Value> = (0..n).map(|_| json!([[0.0]])).collect();
    let tau: Vec<Value> = (1..=n)
        .map(|k| json!([1.0 / k as f64, 1.0 / k as f64]))
        .collect();
    let spec = json!({"example69": {"A": ones, "P": zeros, "tau": tau}});
    let spec_path = write(&dir, "spec.json", &spec.to_string());
    let out = run(&["gen69", "--no-timestamp"], &[&spec_path]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["maps"].as_array().unwrap().len(), n);
    let crit = &v["criterion"];
    assert_eq!(crit["nondecreasing"], true);
    assert_eq!(crit["ratio_bound_holds"], true);
    let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    assert!((f(&crit["growth"]) - (1.0 + harmonic)).abs() <= 1e-12);

    let maps_path = write(&dir, "maps.json", std::str::from_utf8(&out.stdout).unwrap());
    let report = json_of(&run(&["analyze", "--no-timestamp"], &[&maps_path]));
    let steps = report["steps"].as_array().unwrap();
    assert_eq!(steps.len(), n);
    let q_last = f(&steps[n - 1]["q_probes"][0]);
    let traj = crit["q_trajectory"].as_array().unwrap();
    assert!((q_last - f(traj.last().unwrap())).abs() <= 1e-12 * q_last);
}
