use std::path::Path;
use std::process::{Command, Output};

fn qroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qroute")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn noiseless_circuit_gives_empty_dem() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = path(dir.path(), "c.txt");
    let out = qroute(&["gen-circuit", "--code", "surface:3", "--scheme", "routed", "--rounds", "1", "--noise", "none", "--out", &circuit]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = qroute(&["dem", "--circuit", &circuit]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# qroute "));
    assert!(text.lines().filter(|l| !l.starts_with('#')).all(|l| !l.starts_with("error(")));
}

#[test]
fn sample_then_decode() {
    let dir = tempfile::tempdir().unwrap();
    let (c, d, e, p) = (path(dir.path(), "c"), path(dir.path(), "d"), path(dir.path(), "e"), path(dir.path(), "p"));
    assert!(qroute(&["gen-circuit", "--code", "surface:3", "--scheme", "conventional", "--noise", "si1000:0.002", "--out", &c]).status.success());
    assert!(qroute(&["dem", "--circuit", &c, "--out", &d]).status.success());
    assert!(qroute(&["sample", "--circuit", &c, "--shots", "300", "--seed", "4", "--out", &e]).status.success());
    let out = qroute(&["decode", "--dem", &d, "--events", &e, "--out", &p]);
    assert!(out.status.success());
    let predictions = std::fs::read_to_string(&p).unwrap();
    assert_eq!(predictions.lines().filter(|l| !l.starts_with('#')).count(), 300);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failures"));
}

#[test]
fn sweep_is_byte_identical_across_threads() {
    let args = ["sweep", "--code", "surface:3", "--scheme", "routed", "--p", "0.002,0.004", "--shots", "3000", "--seed", "3"];
    let one = qroute(&[&args[..], &["--threads", "1"]].concat());
    let two = qroute(&[&args[..], &["--threads", "2"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    let csv = String::from_utf8(one.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "code,scheme,p,rounds,shots,failures,rate,rate_per_round,stderr,seed");
    assert_eq!(rows.len(), 3);
}

#[test]
fn distance_json_fields() {
    let out = qroute(&["distance", "--code", "surface:3", "--scheme", "routed", "--samples", "30", "--seed", "2"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &doc["results"][0];
    for key in ["code", "scheme", "upper_bound", "witness_size", "samples", "seed"] {
        assert!(!row[key].is_null(), "missing {key}");
    }
    assert_eq!(row["upper_bound"], 3);
    assert!(doc["version"].is_string() && doc["config"].is_object());
}

#[test]
fn contract_violations_exit_nonzero() {
    let colliding = qroute(&["build-code", "--code", "bb:3,3,0,0,0,0"]);
    assert_eq!(colliding.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&colliding.stderr).contains("colliding monomials"));
    let bad_p = qroute(&["sweep", "--noise", "si1000:0.9"]);
    assert_eq!(bad_p.status.code(), Some(2));
    let mismatch = qroute(&["gen-circuit", "--code", "bb72", "--scheme", "routed"]);
    assert_eq!(mismatch.status.code(), Some(2));
    let missing = qroute(&["dem", "--circuit", "/nonexistent/circuit.txt"]);
    assert_eq!(missing.status.code(), Some(3));
}
