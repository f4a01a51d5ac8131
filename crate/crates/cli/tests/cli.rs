use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diagsynth"))
        .args(args)
        .env("DIAGSYNTH_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bench_matches_reference_totals() {
    let o = run(&["bench", "--n-max", "9", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# diagsynth {"));
    assert_eq!(lines.next().unwrap(), "n,rz,cnot,total,reference_total,match");
    let totals: Vec<usize> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[5], "true", "{l}");
            f[3].parse().unwrap()
        })
        .collect();
    assert_eq!(totals, vec![5, 13, 29, 61, 125, 253, 509, 1021]);
}

#[test]
fn fractal_sequence_for_four_qubits() {
    let o = run(&["sequence", "--n", "4", "--kind", "fractal"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1,2,3,2,1,2,3,2");
}

#[test]
fn identity_decomposes_to_zero_angles() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("id.json");
    std::fs::write(&input, r#"{"n": 3, "lambda": [0, 0, 0, 0, 0, 0, 0, 0]}"#).unwrap();
    let o = run(&["decompose", path(&input), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let angles = v["result"]["angles"].as_array().unwrap();
    assert_eq!(angles.len(), 7);
    assert!(angles.iter().all(|a| a.as_f64().unwrap() == 0.0));
    assert_eq!(v["result"]["total"], 13);
}

#[test]
fn tbar_squared_file_recomposes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tbar.txt");
    // λ_m = (m + 3)·2m·0.1 for m = 1..4.
    std::fs::write(&input, "# tbar squared, phi = 0.1\n0.8\n2.0\n3.6\n5.6\n").unwrap();
    let prefix = dir.path().join("out");
    let o = run(&["decompose", path(&input), "--prefix", path(&prefix)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let qasm = std::fs::read_to_string(prefix.with_extension("qasm")).unwrap();
    assert!(qasm.contains("OPENQASM 2.0;"));
    assert_eq!(qasm.matches("cx ").count(), 2);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap();
    assert!(v["result"]["recompose_error"].as_f64().unwrap() < 1e-9);
    assert!((v["result"]["global_phase"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("bad.json");
    std::fs::write(&truncated, r#"{"n": 2, "lambda": [0.1, 0.2"#).unwrap();
    assert_eq!(run(&["decompose", path(&truncated)]).status.code(), Some(2));
    let wrong_len = dir.path().join("three.txt");
    std::fs::write(&wrong_len, "0.1\n0.2\n0.3\n").unwrap();
    assert_eq!(run(&["decompose", path(&wrong_len)]).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["decompose", path(&missing)]).status.code(), Some(2));
}

#[test]
fn impossible_tolerance_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.txt");
    std::fs::write(&input, "0.3\n-1.2\n2.5\n0.7\n").unwrap();
    let o = run(&["decompose", path(&input), "--tol=-1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_suites_pass() {
    for args in [
        vec!["verify", "--suite", "rn", "--n-max", "6"],
        vec!["verify", "--suite", "weyl", "--samples", "12"],
        vec!["verify", "--suite", "roundtrip", "--n-max", "6", "--samples", "10"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let text = stdout(&o);
        assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    }
}

#[test]
fn dataset_train_analyze_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pretty.csv");
    let report = dir.path().join("report.json");
    let o = run(&["dataset", "--stage", "pretty", "--n", "3", "--samples", "500", "--seed", "4", "-o", path(&data)]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["train", "--data", path(&data), "--stop-loss", "1e-14", "-o", path(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["analyze", "--model", path(&report), "--data", path(&data)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["snap"]["comparison"]["kind"], "exact");
    assert!(v["result"]["metrics"]["r2"].as_f64().unwrap() > 0.999);
}

#[test]
fn seeded_runs_are_reproducible() {
    let a = run(&["dataset", "--stage", "raw", "--n", "2", "--samples", "50", "--seed", "9"]);
    let b = run(&["dataset", "--stage", "raw", "--n", "2", "--samples", "50", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn share_and_cluster_tables() {
    let o = run(&["share", "--samples", "200", "--mutation-prob", "0", "--doubled-prob", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("1.0")), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("raw.json");
    let o = run(&["dataset", "--stage", "raw", "--n", "2", "--samples", "200", "--mutation-prob", "0.5", "--doubled-prob", "0", "-o", path(&data)]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["cluster", "--data", path(&data)]);
    assert_eq!(o.status.code(), Some(0));
    let ids: std::collections::BTreeSet<String> = stdout(&o)
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(ids.len(), 2);
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(run(&["sequence", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["dataset", "--stage", "pretty", "--n", "2", "--epsilon", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}
