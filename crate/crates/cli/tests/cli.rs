use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_operforge"))
}

fn write_tmp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("operforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], input: &str, name: &str) -> (i32, Value, Output) {
    let p = write_tmp(name, input);
    let out = bin()
        .args(args)
        .arg(&p)
        .env_remove("OPERFORGE_PRECISION")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, out)
}

const WORKED: &str = r#"{"n":2,"kind":"sl","precision":null,"terms":[
    {"power":-2,"matrix":[["0","0"],["1","0"]]},
    {"power":-1,"matrix":[["1","0"],["0","-1"]]}]}"#;

#[test]
fn normalize_worked_example() {
    let (code, v, _) = run(&["normalize"], WORKED, "worked.json");
    assert_eq!(code, 0);
    let cert = &v["result"]["certificate"];
    assert_eq!(cert["steps"][0]["k"], 1);
    assert_eq!(cert["steps"][0]["X"], serde_json::json!([["0", "-1"], ["0", "0"]]));
    assert_eq!(cert["result"]["ge_coefficients"][0]["coeffs"], serde_json::json!(["2"]));
    assert_eq!(v["result"]["verified"], true);
}

#[test]
fn verify_only_accepts_own_report() {
    let (_, _, out) = run(&["normalize"], WORKED, "w2.json");
    let report = write_tmp("report.json", std::str::from_utf8(&out.stdout).unwrap());
    let status = bin()
        .args(["normalize", "--verify-only"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    let bad = bin()
        .args(["cyclic", "--verify-only"])
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_oper_false_for_simple_pole() {
    let input = r#"{"n":2,"kind":"sl","precision":null,"terms":[
        {"power":-1,"matrix":[["0","1"],["0","0"]]}]}"#;
    let (code, v, _) = run(&["verify-oper"], input, "et.json");
    assert_eq!(code, 0);
    assert_eq!(v["result"]["is_oper"], false);
}

#[test]
fn regularize_zero_connection() {
    let input = r#"{"n":2,"kind":"sl","precision":null,"terms":[]}"#;
    let (code, v, _) = run(&["regularize"], input, "zero.json");
    assert_eq!(code, 0);
    let terms = &v["result"]["certificate"]["gauge"]["terms"];
    assert_eq!(terms[0]["power"], -1);
    assert_eq!(terms[0]["matrix"], serde_json::json!([["0", "0"], ["1", "0"]]));
    assert_eq!(terms[1]["power"], 0);
    assert_eq!(terms[1]["matrix"], serde_json::json!([["1", "0"], ["0", "1"]]));
}

#[test]
fn invalid_inputs_exit_one() {
    let zero_den = r#"{"n":2,"kind":"sl","precision":4,"terms":[
        {"power":-2,"matrix":[["0","1/0"],["0","0"]]}]}"#;
    let (code, v, out) = run(&["normalize"], zero_den, "q0.json");
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "Schema");
    assert!(String::from_utf8_lossy(&out.stderr).contains("/terms/0/matrix/0/1"));

    let trace = r#"{"n":2,"kind":"sl","precision":4,"terms":[
        {"power":-2,"matrix":[["1","0"],["0","0"]]}]}"#;
    let (code, _, out) = run(&["normalize"], trace, "trace.json");
    assert_eq!(code, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/terms/0/matrix"));

    let (code, v, _) = run(&["normalize"], "{\"n\": 2,", "broken.json");
    assert_eq!(code, 1);
    assert!(v["error"]["message"].as_str().unwrap().contains("line"));
}

#[test]
fn exhausted_search_is_retryable() {
    let input = r#"{"n":3,"kind":"sl","precision":null,"terms":[
        {"power":-2,"matrix":[["0","0","1"],["0","0","0"],["0","0","0"]]}]}"#;
    let (code, _, _) = run(
        &["regularize", "--coweight-bound", "0", "--depth-bound", "0"],
        input,
        "e13.json",
    );
    assert_eq!(code, 2);
    let (code, v, _) = run(&["regularize"], input, "e13b.json");
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verified"], true);
}

#[test]
fn precision_from_env_and_output_file() {
    let p = write_tmp("env.json", WORKED);
    let out_path = p.with_file_name("out.json");
    let out = bin()
        .arg("verify-oper")
        .arg(&p)
        .arg("--output")
        .arg(&out_path)
        .env("OPERFORGE_PRECISION", "7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["knobs"]["precision"], 7);

    let low = bin()
        .arg("verify-oper")
        .arg(&p)
        .env("OPERFORGE_PRECISION", "2")
        .output()
        .unwrap();
    assert_eq!(low.status.code(), Some(1));
}

#[test]
fn byte_identical_reruns() {
    let (_, _, a) = run(&["regularize"], r#"{"n":3,"kind":"sl","precision":null,"terms":[]}"#, "z3.json");
    let (_, _, b) = run(&["regularize"], r#"{"n":3,"kind":"sl","precision":null,"terms":[]}"#, "z3.json");
    assert_eq!(a.stdout, b.stdout);
}
