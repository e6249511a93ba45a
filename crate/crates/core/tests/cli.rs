use std::path::Path;
use std::process::{Command, Output};

use berge_core::partition::Certificate;

fn berge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berge")).args(args).output().expect("run berge")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn partition_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = berge(&["partition", "--s", "1", "--k", "3", "--t", "2", "--random-seed", "7", "--prefix", "30", "--out", path_str(&cert)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = berge(&["verify", path_str(&cert)]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], true);
}

#[test]
fn tampered_core_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = berge(&["partition", "--s", "1", "--k", "3", "--t", "2", "--random-seed", "7", "--prefix", "20", "--out", path_str(&cert)]);
    assert_eq!(out.status.code(), Some(0));
    let mut c: Certificate = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let core = &mut c.paths[0].core;
    let last = core.len() - 1;
    core[last] = 10_000;
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&c).unwrap()).unwrap();
    let out = berge(&["verify", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], false);
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn verify_against_another_colouring_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    berge(&["partition", "--s", "1", "--k", "3", "--t", "2", "--random-seed", "7", "--prefix", "20", "--out", path_str(&cert)]);
    let other = dir.path().join("other.json");
    std::fs::write(&other, r#"{"kind":"random","k":3,"r":2,"seed":8}"#).unwrap();
    let out = berge(&["verify", path_str(&cert), "--colouring", path_str(&other)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn brutecheck_graph_layout_not_coverable() {
    let out = berge(&["brutecheck", "--s", "1", "--k", "2", "--t", "2", "--window", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let res: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(res["coverable"], false);
}

#[test]
fn brutecheck_random_colouring_uses_partition_colours() {
    let out = berge(&["brutecheck", "--s", "1", "--k", "3", "--t", "3", "--window", "7", "--random-seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn adversary_writes_loadable_colouring() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("adv.json");
    let out = berge(&["adversary", "--s", "1", "--k", "3", "--t", "2", "--out", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let spec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(spec["kind"], "adversarial");
    assert_eq!(spec["blocks"], serde_json::json!([2, 6, 1]));
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["ok"], true);
    let out = berge(&["brutecheck", "--s", "1", "--k", "3", "--t", "2", "--window", "9", "--colouring", path_str(&file)]);
    assert!(matches!(out.status.code(), Some(0 | 1)));
}

#[test]
fn chain_diagnostics_records() {
    let out = berge(&["chain", "--s", "1", "--k", "3", "--t", "2", "--random-seed", "2", "--prefix", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let anchors = v["anchors"].as_array().unwrap();
    assert_eq!(anchors.len(), 5);
    assert_eq!(anchors[0]["anchor"], 1);
    for key in ["set_size", "chi", "D"] {
        assert!(anchors[0].get(key).is_some());
    }
}

#[test]
fn usage_and_budget_exit_codes() {
    assert_eq!(berge(&["partition", "--s", "1"]).status.code(), Some(2));
    assert_eq!(berge(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(berge(&["partition", "--s", "1", "--k", "2", "--t", "3", "--random-seed", "1"]).status.code(), Some(2));
    let out = berge(&["partition", "--s", "1", "--k", "3", "--t", "3", "--random-seed", "1", "--prefix", "15", "--window", "20", "--max-window", "20"]);
    assert_eq!(out.status.code(), Some(3));
    let out = berge(&["brutecheck", "--s", "1", "--k", "3", "--t", "3", "--window", "12", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
}
