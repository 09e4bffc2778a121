use std::process::{Command, Output};

use netdist_core::report::{agreement_witness_from_json, sequence_from_json};
use netdist_core::{
    parse_enewick, parse_enewick_with_taxa, verify_agreement_witness, verify_sequence, Canonical,
};
use serde_json::Value;

fn netdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn triplet_agreement_distance_is_one() {
    let v = json(&netdist(&[
        "distance",
        "--metric",
        "ad",
        "((1,2),3);",
        "((1,3),2);",
    ]));
    assert_eq!(v["value"], 1);
    assert_eq!(v["metric"], "ad");
    assert_eq!(v["exhausted"], true);
    assert!(v["witness"].is_null());
}

#[test]
fn bad_file_is_a_data_error_with_offset() {
    let dir = std::env::temp_dir().join(format!("netdist-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.nwk");
    std::fs::write(&path, "((1,2),3);\n((1,2,3);\n").unwrap();
    let o = netdist(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.nwk:2") && err.contains("offset"), "{err}");
}

#[test]
fn rspr_neighbourhood_of_a_triplet() {
    let v = json(&netdist(&["neighbors", "--ops", "rspr", "((1,2),3);"]));
    assert_eq!(v["count"], 2);
    let o = netdist(&[
        "neighbors",
        "--ops",
        "rspr",
        "--format",
        "enewick",
        "((1,2),3);",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    let keys: Vec<String> = text
        .lines()
        .map(|l| parse_enewick(l).unwrap().canonical_key().to_hex())
        .collect();
    assert_eq!(keys.len(), 2);
    assert_ne!(keys[0], keys[1]);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(netdist(&["distance", "--bogus"]).status.code(), Some(1));
    assert_eq!(netdist(&["distance", "((1,2),3);"]).status.code(), Some(1));
    assert_eq!(netdist(&[]).status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exits_three() {
    let o = netdist(&[
        "distance",
        "--metric",
        "pr",
        "--budget-states",
        "2",
        "((1,2),(3,4));",
        "((1,3),(2,4));",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = netdist(&[
        "distance",
        "--metric",
        "ad",
        "--budget-states",
        "1",
        "((1,2),(3,4));",
        "((1,3),(2,4));",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn taxa_mismatch_is_a_data_error() {
    let o = netdist(&["distance", "((1,2),3);", "((1,2),4);"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "distance",
        "--metric",
        "snpr",
        "--witness",
        "((1,(2)#H1),(#H1,(3,4)));",
        "(((1,2),3),4);",
    ];
    let a = netdist(&args);
    let b = netdist(&[
        "--threads",
        "1",
        args[0],
        args[1],
        args[2],
        args[3],
        args[4],
        args[5],
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let s = netdist(&["selftest", "--seed", "5", "--samples", "4"]);
    let t = netdist(&["selftest", "--seed", "5", "--samples", "4"]);
    assert!(s.status.success());
    assert_eq!(s.stdout, t.stdout);
}

#[test]
fn emitted_witnesses_reverify() {
    let (x, y) = ("((1,(2)#H1),(#H1,(3,4)));", "(((1,2),3),4);");
    let n = parse_enewick(x).unwrap();
    let np = parse_enewick_with_taxa(y, n.taxa()).unwrap();
    let v = json(&netdist(&["distance", "--metric", "ad", "--witness", x, y]));
    let (g, cert) = agreement_witness_from_json(&v["witness"], &n, &np).unwrap();
    assert!(verify_agreement_witness(&g, &n, &np, &cert).ok);
    assert_eq!(v["witness"]["d"], v["value"]);
    for metric in ["pr", "snpr"] {
        let v = json(&netdist(&[
            "distance",
            "--metric",
            metric,
            "--witness",
            x,
            y,
        ]));
        let seq = sequence_from_json(&v["witness"], n.taxa()).unwrap();
        assert!(verify_sequence(&seq).ok, "{metric}");
        assert_eq!(seq.len() as u64, v["value"].as_u64().unwrap());
    }
    for ops in ["pr", "snpr"] {
        let v = json(&netdist(&[
            "sequence", "--metric", "ad", "--ops", ops, x, y,
        ]));
        let seq = sequence_from_json(&v["sequence"], n.taxa()).unwrap();
        assert!(verify_sequence(&seq).ok, "{ops}");
    }
}

#[test]
fn enumerate_counts_trees() {
    let v = json(&netdist(&["enumerate", "--taxa", "3"]));
    assert_eq!(v["count"], 3);
    let v = json(&netdist(&["enumerate", "--taxa", "4"]));
    assert_eq!(v["count"], 15);
}

#[test]
fn dot_output() {
    let o = netdist(&["validate", "--format", "dot", "((1,(2)#H1),(#H1,3));"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("digraph"), "{text}");
    let o = netdist(&["distance", "--format", "dot", "((1,2),3);", "((1,3),2);"]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("digraph"));
}
