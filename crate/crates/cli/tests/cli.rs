//! End-to-end tests driving the compiled binary: flag grammar, output
//! shapes, exit codes, and determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistcalc"))
        .args(args)
        .env_remove("TWISTCALC_CAP")
        .output()
        .expect("binary runs")
}

fn run_capped(cap: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistcalc"))
        .args(args)
        .env("TWISTCALC_CAP", cap)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

fn c4_path() -> String {
    format!("{}/tests/fixtures/c4.json", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn reid_reports_infinite_with_witness_layer() {
    let out = run(&[
        "reid", "--ring", "Z", "--n", "5", "--diag", "1,-1,1,1,-1", "--m", "0",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("R = inf"), "got: {text}");
    assert!(text.contains("witness layer: 1"), "got: {text}");
}

#[test]
fn oracle_c4_inversion_is_the_strict_counterexample() {
    let out = run(&[
        "oracle",
        "--group",
        &c4_path(),
        "--auto",
        "inverse",
        "--check",
        "zf",
        "--expect",
        "classes:2",
        "--expect",
        "strict",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("twisted classes: 2"), "got: {text}");
    assert!(text.contains("R = 2 <= 2 * 2 = 4 (strict)"), "got: {text}");
}

#[test]
fn solve_returns_the_corner_conjugator() {
    let out = run(&[
        "solve",
        "--ring",
        "Q",
        "--n",
        "3",
        "--diag",
        "1,2,4",
        "--target",
        r#"{"n":3,"entries":[[1,3,"1"]]}"#,
        "--expect",
        "verified",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("Z = T_{1,3}(4/3)"), "got: {}", stdout(&out));
}

#[test]
fn expectation_failures_exit_two() {
    let out = run(&[
        "reid",
        "--ring",
        "Z[sqrt,2]",
        "--diag",
        "1,1+w,3+2w",
        "--expect",
        "17",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("expectation failed"));

    let out = run(&[
        "sweep", "--ring", "Z[isqrt,1]", "--n", "4", "--expect", "all-inf",
    ]);
    assert_eq!(code(&out), 2, "n=4 over Z[i] has finite cases");
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["reid", "--ring", "Z"]);
    assert_eq!(code(&out), 1, "missing --diag");

    let out = run(&["reid", "--ring", "K9", "--diag", "1,1"]);
    assert_eq!(code(&out), 1, "unknown ring");

    let out = run(&["oracle", "--group", &c4_path()]);
    assert_eq!(code(&out), 1, "missing --auto for a loaded table");

    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 1, "unknown subcommand");

    let out = run(&["--help"]);
    assert_eq!(code(&out), 0, "help is not an error");
}

#[test]
fn caps_exit_three() {
    let out = run_capped("10", &["sweep", "--ring", "Z", "--n", "5"]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("cap exceeded"));

    let out = run_capped("100", &["oracle", "--mod", "5", "--ring", "Z", "--diag", "1,1,1,1"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("15625"), "true size reported");
}

#[test]
fn sweep_json_is_deterministic_and_stringly_numeric() {
    let args = ["sweep", "--ring", "Z", "--n", "5", "--json", "--expect", "all-inf"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout, "byte-identical reruns");

    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 33, "32 cases plus a summary");
    for line in &lines[..32] {
        let v: serde_json::Value = serde_json::from_str(line).expect("case line parses");
        assert!(v["value"].is_string(), "math values are strings: {line}");
        assert!(v["index"].is_u64(), "indices are numbers: {line}");
    }
    let summary: serde_json::Value = serde_json::from_str(lines[32]).unwrap();
    assert_eq!(summary["summary"], serde_json::Value::Bool(true));
    assert_eq!(summary["total"], serde_json::json!(32));
    assert_eq!(summary["finite"], serde_json::json!(0));
}

#[test]
fn sweep_streams_cases_in_index_order_under_jobs() {
    let out = run(&[
        "sweep", "--ring", "Z[isqrt,1]", "--n", "5", "--jobs", "2", "--json",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut expected = 0u64;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v.get("summary").is_some() {
            break;
        }
        assert_eq!(v["index"].as_u64(), Some(expected), "stream order");
        expected += 1;
    }
    assert_eq!(expected, 1024, "2 * 2 * 4^4 cases");
}

#[test]
fn spectrum_expectations_hold_in_the_heisenberg_family() {
    let out = run(&[
        "spectrum",
        "--ring",
        "Z",
        "--n",
        "3",
        "--heis-bound",
        "2",
        "--expect",
        "attains:2",
        "--expect",
        "all-even",
        "--expect",
        "has-inf",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("R = 2:"), "got: {}", stdout(&out));
}

#[test]
fn hsub_certifies_both_verdicts() {
    let base = [
        "hsub", "--ring", "Z", "--n", "3", "--diag", "1,1,1", "--lambda", "3",
    ];
    let mut pos = base.to_vec();
    pos.extend(["--a", "5", "--b", "2", "--expect", "index:3", "--expect", "conjugate"]);
    let out = run(&pos);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("conjugate via z ="));

    let mut neg = base.to_vec();
    neg.extend(["--a", "5", "--b", "3", "--expect", "not-conjugate", "--json"]);
    let out = run(&neg);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["pair"]["conjugate"], serde_json::Value::Bool(false));
    assert_eq!(v["index"], serde_json::json!("3"));
}

#[test]
fn oracle_reduction_runs_the_proposition_suite() {
    let out = run(&[
        "oracle", "--mod", "3", "--ring", "Z", "--diag", "1,-1,1", "--check", "inn",
        "--check", "zf", "--check", "prod", "--expect", "all-passed", "--expect",
        "classes:3", "--json",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["size"], serde_json::json!(27));
    assert_eq!(v["classes"], serde_json::json!(3));
    assert!(v["checks"].as_array().unwrap().len() >= 3);
}

#[test]
fn inline_json_arguments_work() {
    let table = r#"{"size":2,"mul":[[0,1],[1,0]],"generators":[1]}"#;
    let out = run(&[
        "oracle", "--group", table, "--auto", "identity", "--expect", "classes:2",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
}
