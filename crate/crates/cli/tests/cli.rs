//! End-to-end tests for the `finsum` binary: output shapes, exit codes,
//! and byte-identical reports for identical invocations.

use std::process::{Command, Output};

fn finsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn fs_reports_values_and_exits_zero() {
    let out = finsum(&["fs", "--set", "1,2,4"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(
        report["result"]["values"],
        serde_json::json!([1, 2, 3, 4, 5, 6, 7])
    );
    assert_eq!(report["tool"], "finsum");
    assert!(report["input_hash"].as_str().unwrap().len() == 16);
}

#[test]
fn witness_ip_none_exits_one() {
    let out = finsum(&["witness-ip", "--set", "1,2,4", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["elements"], serde_json::Value::Null);
}

#[test]
fn witness_ip_found_exits_zero() {
    let out = finsum(&["witness-ip", "--set", "1,2,3,4,5,6,7", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["elements"], serde_json::json!([1, 2, 4]));
}

#[test]
fn caps_exceeded_exits_two() {
    let set: Vec<String> = (1..=26).map(|i| (1u64 << i).to_string()).collect();
    let out = finsum(&["fs", "--set", &set.join(",")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_error_exits_sixty_four() {
    let out = finsum(&["fs", "--set", "not-a-number"]);
    assert_eq!(out.status.code(), Some(64));
    let out = finsum(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn greedy_insufficient_exits_one() {
    let out = finsum(&["greedy", "--set", "4,8", "--length", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["error"], "insufficient-source");
}

#[test]
fn reports_are_byte_identical() {
    let args = ["judge", "--set", "2,4,6,8", "--ideal", "vdw:4"];
    let first = finsum(&args);
    let second = finsum(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.status.code(), Some(0));
    let report = stdout_json(&first);
    assert_eq!(report["result"]["verdict"], "positive");
}

#[test]
fn seeded_probe_reports_are_reproducible() {
    let args = [
        "katetov-verify",
        "--map",
        "identity",
        "--n",
        "16",
        "--source",
        "hindman:2",
        "--target",
        "hindman:2",
        "--probes",
        "random:50",
        "--seed",
        "7",
    ];
    let first = finsum(&args);
    let second = finsum(&args);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert_eq!(first.stdout, second.stdout);
    let report = stdout_json(&first);
    assert_eq!(report["seed"], 7);
}

#[test]
fn katetov_counterexample_exits_one() {
    let out = finsum(&[
        "katetov-verify",
        "--map",
        "constant:0",
        "--n",
        "8",
        "--m",
        "4",
        "--source",
        "summable",
        "--target",
        "hindman:2",
        "--probes",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["passed"], serde_json::json!(false));
    assert!(report["result"]["counterexample"].is_object());
}

#[test]
fn partition_csv_format() {
    let out = finsum(&["partition", "--set", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "k,in_cell,complement\n0,1,0\n"
    );
}

#[test]
fn tail_shift_report() {
    let out = finsum(&["tail", "--d", "1,3,9,27", "--e", "4,36", "--drop", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["shift"], 5);
    assert_eq!(report["result"]["surviving"], 1);
}

#[test]
fn refine_avoid_exhaustion_exits_one() {
    let out = finsum(&[
        "refine-avoid",
        "--set",
        "1,2",
        "--avoid",
        "1,2,3",
        "--target",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["exhausted_at"], 0);
}

#[test]
fn separate_then_verify_roundtrip() {
    let dir = std::env::temp_dir().join("finsum-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.json");
    let trace_str = trace.to_str().unwrap();

    let out = finsum(&[
        "separate",
        "--coloring",
        "identity",
        "--domain",
        "4096",
        "--stages",
        "4",
        "--out",
        trace_str,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(
        report["result"]["x"],
        serde_json::json!([27, 81, 729, 2187])
    );
    assert_eq!(
        report["result"]["verification_passed"],
        serde_json::json!(true)
    );

    let out = finsum(&[
        "verify-trace",
        "--trace",
        trace_str,
        "--coloring",
        "identity",
        "--domain",
        "4096",
    ]);
    assert_eq!(out.status.code(), Some(0));

    // The wrong coloring must fail verification.
    let out = finsum(&[
        "verify-trace",
        "--trace",
        trace_str,
        "--coloring",
        "log2",
        "--domain",
        "4096",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn separate_exhaustion_exits_one() {
    let out = finsum(&[
        "separate",
        "--coloring",
        "log2",
        "--domain",
        "4096",
        "--stages",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["outcome"]["outcome"], "exhausted");
}

#[test]
fn check_fibers_matches_spec_example() {
    let out = finsum(&[
        "check-fibers",
        "--coloring",
        "mod:5",
        "--domain",
        "201",
        "--depth",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(
        report["result"]["short_circuit"]["witness"]["ground"],
        serde_json::json!([5, 10, 20])
    );
}

#[test]
fn weight_is_exact() {
    let out = finsum(&["weight", "--set", "0,1,2,3,4,5,6,7,8,9"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["weight"]["num"], "7381");
    assert_eq!(report["result"]["weight"]["den"], "2520");
}
