use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_riemann-dn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn forward(dir: &Path, spec: &str, n: usize) -> PathBuf {
    let path = dir.join(format!("{spec}.json"));
    let o = run(&["forward", spec, "--n", &n.to_string(), "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn forward_is_deterministic_and_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let a = forward(dir.path(), "two-disks", 64);
    let first = std::fs::read(&a).unwrap();
    let again = run(&["forward", "two-disks", "--n", "64"]);
    assert_eq!(code(&again), 0);
    assert_eq!(again.stdout, first);
    assert!(first.ends_with(b"}\n"));
    let (file, ds) = riemann_dn::io::read_dataset(&a).unwrap();
    let rewritten =
        riemann_dn::io::to_canonical_json(&riemann_dn::io::DatasetFile::from_dataset(&ds, file.meta)).unwrap();
    assert_eq!(rewritten.as_bytes(), first.as_slice());
    let truth = json(&dir.path().join("two-disks.truth.json"));
    assert_eq!(truth["q"], 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["forward", "no-such-scenario"])), 2);
    assert_eq!(code(&run(&["reconstruct"])), 2);
    assert_eq!(code(&run(&["reconstruct", dir.path().join("missing.json").to_str().unwrap()])), 2);
    let ds = forward(dir.path(), "disk-z-z2", 64);
    let ds = ds.to_str().unwrap();
    let o = run(&["check", ds]);
    assert_eq!(code(&o), 4);
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["exit_code"], 4);
    assert_eq!(code(&run(&["check", ds, "--scenario", "nope"])), 4);
    assert_eq!(code(&run(&["reconstruct", ds, "--grid", "0,1,0"])), 2);

    let mut file = json(Path::new(ds));
    file["components"][0]["theta"][0] = serde_json::json!(vec![[0.0, 0.0]; 64]);
    file["components"][0].as_object_mut().unwrap().remove("f");
    let zeroed = dir.path().join("zeroed.json");
    std::fs::write(&zeroed, serde_json::to_string(&file).unwrap()).unwrap();
    let o = run(&["reconstruct", zeroed.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "theta-division");
}

#[test]
fn reconstruct_report_and_forms() {
    let dir = tempfile::tempdir().unwrap();
    let ds = forward(dir.path(), "disk-z-z2", 256);
    let cloud = dir.path().join("cloud.csv");
    let o = run(&[
        "reconstruct",
        ds.to_str().unwrap(),
        "--grid",
        "-0.5,0.5,-0.2,0.2,4,3",
        "--forms",
        "0,2",
        "--out",
        cloud.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&cloud).unwrap();
    assert_eq!(text.lines().next().unwrap(), "z1_re,z1_im,z2_re,z2_im,branch,form0_re,form0_im,form2_re,form2_im");
    assert_eq!(text.lines().count(), 1 + 24);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        let z = num_complex::Complex64::new(v[0], v[1]);
        // ∂ũ₀/∂F₂ = 1/(4z) and ∂ũ₂/∂F₂ = z/4 for this scenario
        let f0 = num_complex::Complex64::new(v[5], v[6]);
        let f2 = num_complex::Complex64::new(v[7], v[8]);
        assert!((f0 - 1.0 / (4.0 * z)).norm() < 1e-6, "{line}");
        assert!((f2 - z / 4.0).norm() < 1e-6, "{line}");
    }
    let report = json(&dir.path().join("cloud.report.json"));
    assert_eq!(report["p"], 2);
    assert_eq!(report["q"], 0);
    assert!(report["oracle_error"].as_f64().unwrap() < 1e-8);
    assert!(report["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn reconstruct_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let ds = forward(dir.path(), "identity", 128);
    let o = run(&["reconstruct", ds.to_str().unwrap(), "--grid", "-0.3,0.3,0,0,3,1", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let d: Vec<f64> = (0..2).map(|k| r["z1"][k].as_f64().unwrap() - r["z2"][k].as_f64().unwrap()).collect();
        assert!(d[0].hypot(d[1]) < 1e-8, "{r}");
    }
}

#[test]
fn characterize_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let pole = forward(dir.path(), "disk-pole", 256);
    let pole = pole.to_str().unwrap();
    let mut verdicts = Vec::new();
    for order in ["4", "12"] {
        let o = run(&["characterize", pole, "--order", order]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
        verdicts.push((doc["verdict"].clone(), doc["p"].clone()));
    }
    assert_eq!(verdicts[0], verdicts[1]);
    assert_eq!(verdicts[0].0, "shock-trace");
    assert_eq!(verdicts[0].1, 1);

    let a = run(&["--seed", "11", "characterize", pole]);
    let b = run(&["--seed", "11", "characterize", pole]);
    assert_eq!(a.stdout, b.stdout);

    let disk = forward(dir.path(), "disk-z-z2", 256);
    let o = run(&["characterize", disk.to_str().unwrap(), "--orientation", "1:0:1:0,0:0:-0.05:0.02"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["verdict"], "affine-in-xi0");
    assert!(doc["moment_condition"]["max_modulus"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["orientation"][0]["winding"], 1);

    assert_eq!(code(&run(&["characterize", pole, "--order", "4", "--pmax", "2"])), 2);
}

#[test]
fn characterize_series_input() {
    let dir = tempfile::tempdir().unwrap();
    let order = 8;
    let x = riemann_dn::series::BivariateSeries::x(order);
    let y = riemann_dn::series::BivariateSeries::y(order);
    // trace of z² + yz + x, i.e. −y, is not affine in x yet satisfies the two-wave system
    let path = dir.path().join("g.json");
    riemann_dn::io::write_json(&path, &(-&y)).unwrap();
    let o = run(&["characterize", path.to_str().unwrap(), "--series", "--order", "8", "--pmax", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["verdict"], "affine-in-xi0");
    riemann_dn::io::write_json(&path, &(&x * &x)).unwrap();
    let o = run(&["characterize", path.to_str().unwrap(), "--series", "--order", "8", "--pmax", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    // negative control: the verdict is recorded only, but a single wave x² + ax + b would need 2x³ = 0
    assert!(doc["verdict"] == "shock-trace" || doc["verdict"] == "negative");
    assert_ne!(doc["p"], 1);
    assert_eq!(doc["attempts"][0]["p"], 1);
}

#[test]
fn check_reports() {
    let dir = tempfile::tempdir().unwrap();
    let ds = forward(dir.path(), "disk-z-z2", 256);
    let ds_s = ds.to_str().unwrap();
    let o =
        run(&["check", ds_s, "--scenario", "disk-z-z2", "--checks", "green,jump,flux,period", "--loop", "-0.2,0,0.05"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["status"], "pass", "{doc}");

    let mut file = json(&ds);
    for v in file["components"][0]["theta"][0].as_array_mut().unwrap() {
        let re = v[0].as_f64().unwrap() * 1.1;
        let im = v[1].as_f64().unwrap() * 1.1;
        *v = serde_json::json!([re, im]);
    }
    file["components"][0].as_object_mut().unwrap().remove("f");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&file).unwrap()).unwrap();
    let o = run(&["check", bad.to_str().unwrap(), "--scenario", "disk-z-z2", "--checks", "green"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["status"], "fail");

    let ext = forward(dir.path(), "exterior-disk", 128);
    assert_eq!(code(&run(&["check", ext.to_str().unwrap(), "--scenario", "exterior-disk", "--checks", "green"])), 4);
}
