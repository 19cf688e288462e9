use std::path::Path;
use std::process::{Command, Output};

use coopnet::{InfluenceMatrix, Instance};

fn coopnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = coopnet(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    coopnet(dir, args).status.code().unwrap()
}

#[test]
fn generate_optimize_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "3", "--out", "inst.json", "gen-instance", "--model", "pa", "--n", "40"]);
    assert!(d.join("inst.wbar.csv").exists());
    let inst = Instance::load(d.join("inst.json")).unwrap();
    assert_eq!(inst.n(), 40);

    let report: serde_json::Value = serde_json::from_str(&ok(
        d,
        &["optimize", "--instance", "inst.json", "--k", "3", "--trace", "trace.csv"],
    ))
    .unwrap();
    let s: Vec<usize> = serde_json::from_value(report["S"].clone()).unwrap();
    assert_eq!(s.len(), 3);
    let trace = std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,chosen,marginal,cumulative\n"));

    let set = s.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",");
    let eval: serde_json::Value = serde_json::from_str(&ok(
        d,
        &["--format", "json", "evaluate", "--instance", "inst.json", "--set", &set],
    ))
    .unwrap();
    assert!((eval["gain_egal"].as_f64().unwrap() - report["gain_egal"].as_f64().unwrap()).abs() < 1e-12);
    let csv = ok(d, &["evaluate", "--instance", "inst.json", "--set", &set]);
    assert!(csv.starts_with("gain_agg,gain_egal,faulty_mass,acc\n"));

    let agg: serde_json::Value = serde_json::from_str(&ok(
        d,
        &["optimize", "--objective", "agg", "--instance", "inst.json", "--k", "2", "--phi", "0.5"],
    ))
    .unwrap();
    let closed = agg["gain_closed"].as_f64().unwrap();
    assert!((closed - agg["gain_direct"].as_f64().unwrap()).abs() < 1e-9);

    let appx: serde_json::Value = serde_json::from_str(&ok(
        d,
        &["optimize", "--method", "appx-ind", "--instance", "inst.json", "--k", "2"],
    ))
    .unwrap();
    assert!(appx["ambiguity"]["ambiguous"].is_array());
}

#[test]
fn group_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "5", "--out", "g.json", "gen-group", "--n", "12", "--red", "3", "--blue", "3", "--rho", "0.7"]);
    ok(d, &["--seed", "5", "--out", "w.csv", "gen-graph", "--model", "random-w", "--n", "12", "--sparsity", "0.5"]);
    ok(d, &["--seed", "5", "--out", "gi.json", "gen-group", "--group", "g.json", "--wbar", "w.csv", "--omega", "8"]);
    let r: serde_json::Value = serde_json::from_str(&ok(
        d,
        &["optimize", "--method", "appx-group", "--instance", "gi.json", "--group", "g.json", "--k", "2"],
    ))
    .unwrap();
    assert_eq!(r["S"].as_array().unwrap().len(), 2);
}

#[test]
fn weights_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("w.csv"), "0,1\n1,0\n").unwrap();
    let out = ok(d, &["weights", "--dynamics", "fj", "--w", "w.csv"]);
    let m = InfluenceMatrix::from_csv_str(&out).unwrap();
    assert!((m.get(0, 0) - 2.0 / 3.0).abs() < 1e-12);
    let trip = ok(d, &["weights", "--dynamics", "fj-finite", "--w", "w.csv", "--steps", "2", "--triplets"]);
    assert!(trip.starts_with("i,j,w\n"));
    ok(d, &["--out", "p.csv", "weights", "--dynamics", "product", "--w", "w.csv", "--w", "w.csv"]);
    let p = InfluenceMatrix::load(d.join("p.csv")).unwrap();
    assert_eq!(p, InfluenceMatrix::identity(2));
}

#[test]
fn fixture_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--out", "adv.json", "fixture", "adversarial", "--n", "10", "--variant", "2"]);
    let inst = Instance::load(d.join("adv.json")).unwrap();
    assert_eq!(inst.n(), 24);
    let rows = ok(d, &["sweep", "--instance", "adv.json", "--k-max", "2", "--methods", "Egal,ErrRate"]);
    assert_eq!(rows.lines().count(), 1 + 2 * 2);
    let json: serde_json::Value = serde_json::from_str(&ok(
        d,
        &["--format", "json", "sweep", "--dataset", "ws", "--n", "32", "--seeds", "2", "--k-max", "3", "--summary", "sum.csv"],
    ))
    .unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2 * 6 * 3);
    assert!(std::fs::read_to_string(d.join("sum.csv")).unwrap().starts_with("method,seed,k_max"));
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let runs: [&[&str]; 3] = [
        &["--seed", "9", "--threads", "2", "gen-instance", "--model", "ws", "--n", "30"],
        &["--seed", "9", "sweep", "--dataset", "random-w", "--n", "24", "--seeds", "3", "--k-max", "3"],
        &["--seed", "9", "--format", "json", "gen-graph", "--model", "pa", "--n", "20", "--wbar"],
    ];
    for args in runs {
        let a = coopnet(d, args);
        let b = coopnet(d, args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    ok(d, &["--seed", "1", "--out", "a.json", "gen-instance", "--model", "er", "--n", "16"]);
    ok(d, &["--seed", "1", "--out", "b.json", "gen-instance", "--model", "er", "--n", "16"]);
    assert_eq!(
        std::fs::read(d.join("a.wbar.csv")).unwrap(),
        std::fs::read(d.join("b.wbar.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(d, &["optimize"]), 2);
    assert_eq!(code(d, &["gen-graph", "--model", "er", "--p", "1.5", "--n", "4"]), 2);
    assert_eq!(code(d, &["evaluate", "--instance", "missing.json"]), 2);

    std::fs::write(d.join("flip.csv"), "0,1\n1,0\n").unwrap();
    assert_eq!(code(d, &["weights", "--dynamics", "degroot", "--w", "flip.csv", "--max-iter", "1000"]), 3);

    ok(d, &["--out", "big.json", "gen-instance", "--model", "random-w", "--n", "60"]);
    assert_eq!(code(d, &["optimize", "--method", "brute", "--instance", "big.json", "--k", "5"]), 4);
    ok(d, &["--out", "small.json", "gen-instance", "--model", "random-w", "--n", "8"]);
    assert_eq!(code(d, &["optimize", "--method", "brute", "--instance", "small.json", "--k", "2"]), 0);
    assert_eq!(code(d, &["optimize", "--instance", "small.json", "--k", "9"]), 2);
    assert_eq!(code(d, &["optimize", "--instance", "small.json", "--k", "2", "--phi", "0"]), 2);
}
