use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn rgrover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgrover")).args(args).output().unwrap()
}

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.display().to_string()
}

/// Rows of a CSV as header-keyed maps.
fn csv_rows(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn col(rows: &[std::collections::HashMap<String, String>], name: &str) -> Vec<f64> {
    rows.iter().map(|r| r[name].parse().unwrap()).collect()
}

#[test]
fn n4_search_succeeds_and_manifest_checksums_match() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "k2.json",
        r#"{"architecture":"sequential","k":2,"marked":[1,0]}"#,
    );
    let out = tmp.path().join("run");
    let o = rgrover(&["--out", out.to_str().unwrap(), "grover", &cfg, "--emit-state"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("trace.csv"));
    assert_eq!(rows.len(), 2);
    assert!((col(&rows, "success_prob")[1] - 1.0).abs() < 1e-9);

    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["trace.csv", "trace.json", "state.json"]);
    for o in outputs {
        let bytes = fs::read(out.join(o["path"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let state: Value = serde_json::from_str(&fs::read_to_string(out.join("state.json")).unwrap()).unwrap();
    assert_eq!(state["amplitudes"].as_array().unwrap().len(), 9);
}

#[test]
fn subregister_trace_matches_sequential() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = write_config(
        tmp.path(),
        "seq.json",
        r#"{"architecture":"sequential","k":4,"marked":[1,0,1,1]}"#,
    );
    let sub = write_config(
        tmp.path(),
        "sub.json",
        r#"{"architecture":"subregister","k":4,"marked":[1,0,1,1],"partition":{"n_s":2,"k_s":2}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(
        rgrover(&["--out", a.to_str().unwrap(), "--format", "csv", "grover", &seq])
            .status
            .success()
    );
    assert!(
        rgrover(&["--out", b.to_str().unwrap(), "--format", "csv", "grover", &sub])
            .status
            .success()
    );
    let (pa, pb) = (
        col(&csv_rows(&a.join("trace.csv")), "success_prob"),
        col(&csv_rows(&b.join("trace.csv")), "success_prob"),
    );
    assert_eq!(pa.len(), pb.len());
    for (x, y) in pa.iter().zip(&pb) {
        assert!((x - y).abs() < 1e-9);
    }
    assert!(!a.join("trace.json").exists());
}

#[test]
fn bad_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let broken = write_config(tmp.path(), "broken.json", r#"{"architecture":"sequential","k":2,"#);
    let o = rgrover(&["--out", out.to_str().unwrap(), "grover", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let mismatch = write_config(
        tmp.path(),
        "mismatch.json",
        r#"{"architecture":"sequential","k":3,"marked":[1,0]}"#,
    );
    assert_eq!(
        rgrover(&["--out", out.to_str().unwrap(), "grover", &mismatch])
            .status
            .code(),
        Some(2)
    );
    assert!(!out.exists());

    let o = rgrover(&[
        "--out",
        out.to_str().unwrap(),
        "table",
        "--species",
        "no/such/species.json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = rgrover(&[
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "--param",
        "B",
        "--from",
        "1e3",
        "--to",
        "1e5",
        "--points",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = rgrover(&[
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "--param",
        "k",
        "--values",
        "4,5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn verify_passes_and_catches_phase_mutation() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good");
    let o = rgrover(&["--out", good.to_str().unwrap(), "verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));

    let bad = tmp.path().join("bad");
    let o = rgrover(&[
        "--out",
        bad.to_str().unwrap(),
        "verify",
        "--return-phase",
        "3.141592653589793",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let rows = csv_rows(&bad.join("verify.csv"));
    let oracle = rows
        .iter()
        .find(|r| r["check"] == "sequential oracle matrices")
        .unwrap();
    assert_eq!(oracle["passed"], "false");
    assert!(bad.join("manifest.json").exists());
}

#[test]
fn omega_sweep_minimum_near_optimum() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let (b, tau) = (1e4f64, 1.0f64);
    let opt = (7.0 * std::f64::consts::PI).cbrt() * b.powf(2.0 / 3.0) / tau.cbrt();
    let (lo, hi) = ((0.5 * opt).to_string(), (2.0 * opt).to_string());
    let o = rgrover(&[
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
        "sweep",
        "--param",
        "Omega",
        "--B",
        "1e4",
        "--tau",
        "1",
        "--from",
        &lo,
        "--to",
        &hi,
        "--points",
        "41",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("sweep_Omega.csv"));
    let (w, e) = (col(&rows, "Omega"), col(&rows, "error"));
    let best = (0..e.len()).min_by(|&i, &j| e[i].total_cmp(&e[j])).unwrap();
    assert!((w[best] / opt - 1.0).abs() < 0.1, "minimum at {} vs {opt}", w[best]);
}

#[test]
fn b_sweep_slope_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        rgrover(&[
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            "5",
            "sweep",
            "--param",
            "B",
            "--tau",
            "1",
            "--from",
            "1e3",
            "--to",
            "1e5",
            "--points",
            "5",
        ])
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(args(&a).status.success());
    assert!(args(&b).status.success());
    let ta = fs::read(a.join("sweep_B.csv")).unwrap();
    assert_eq!(ta, fs::read(b.join("sweep_B.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("sweep_B.json")).unwrap(),
        fs::read(b.join("sweep_B.json")).unwrap()
    );
    let slope = col(&csv_rows(&a.join("sweep_B.csv")), "fit_slope")[0];
    assert!((-0.75..=-0.58).contains(&slope), "{slope}");
}

#[test]
fn d_sweep_gives_fourth_power_in_vdw_regime() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let species = presets().join("cs_like.json");
    let o = rgrover(&[
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "--param",
        "d",
        "--species",
        species.to_str().unwrap(),
        "--from",
        "30",
        "--to",
        "60",
        "--points",
        "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("sweep_d.csv"));
    for s in col(&rows, "pair_local_slope") {
        assert!((s / 4.0 - 1.0).abs() < 0.02, "{s}");
    }
}

#[test]
fn table_reproduces_derived_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let species = presets().join("cs_like.json");
    let o = rgrover(&[
        "--out",
        out.to_str().unwrap(),
        "table",
        "--species",
        species.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("table.txt").exists());
    let text = fs::read_to_string(out.join("table.csv")).unwrap();
    let exact = text
        .lines()
        .filter(|l| l.contains(",exact,") || l.ends_with(",exact"))
        .count();
    // five Shenvi cells and two sub-register cells
    assert_eq!(exact, 7, "{text}");
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("table.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 5);
}
