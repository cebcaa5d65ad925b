use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn relevance(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_relevance"))
        .args(args)
        .env_remove("RELEVANCE_ENUM_CAP")
        .output()
        .expect("the binary runs");
    report(out)
}

fn report(out: Output) -> (i32, Value) {
    let code = out.status.code().expect("exit code");
    let value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stdout));
    });
    (code, value)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decide_finds_the_single_negated_variable() {
    let (code, r) = relevance(&["decide", "--formula", "(x1&x2)|!x3", "--x", "110", "--k", "1", "--delta", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["verdict"], "yes");
    assert_eq!(r["result"]["witness"], serde_json::json!([3]));
    assert_eq!(r["params"]["delta"], "1");
    assert_eq!(r["params"]["x"], "110");
}

#[test]
fn decide_answers_no_with_exit_one() {
    let (code, r) = relevance(&["decide", "--formula", "x1 ^ x2", "--x", "11", "--k", "1", "--delta", "3/4"]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["verdict"], "no");
}

#[test]
fn pi_gadget_reports_dnf_and_trace() {
    let (code, r) = relevance(&["gadget", "pi", "--eta", "7/10", "--ell", "4"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["pi"], "(x1 | (x2 & x3) | (x4 & x5 & x6))");
    assert_eq!(r["result"]["prob"]["exact"], "43/2^6");
    let widths: Vec<u64> = r["result"]["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["delta_n"].as_u64().unwrap())
        .collect();
    assert_eq!(widths, [1, 2, 3]);
}

#[test]
fn assignment_of_the_wrong_length_is_a_usage_error() {
    let (code, r) = relevance(&["eval", "--formula", "x1 & x2", "--x", "101"]);
    assert_eq!(code, 64);
    assert_eq!(r["error"]["reason"], "arity_mismatch");
    let (code, _) = relevance(&["check", "--formula", "x1 & x2", "--x", "1", "--s", "1", "--delta", "1/2"]);
    assert_eq!(code, 64);
}

#[test]
fn arity_flag_extends_the_formula() {
    let (code, r) = relevance(&["prob", "--formula", "x1", "--arity", "3", "--x", "100", "--s", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["agreement"]["exact"], "1/2^0");
    assert_eq!(r["params"]["arity"], 3);
}

#[test]
fn decimals_are_read_exactly() {
    let (code, r) = relevance(&["check", "--formula", "x1 | x2", "--x", "10", "--s", "", "--delta", "0.75"]);
    assert_eq!(code, 0);
    assert_eq!(r["params"]["delta"], "3/4");
    let (code, _) = relevance(&["check", "--formula", "x1 | x2", "--x", "10", "--s", "", "--delta", "0.76"]);
    assert_eq!(code, 1);
}

#[test]
fn sampling_requires_a_seed() {
    let args = ["sample", "--formula", "x1 & x2", "--x", "11", "--s", "1", "--delta", "3/4", "--gamma", "1/10"];
    let (code, r) = relevance(&args);
    assert_eq!(code, 64);
    assert_eq!(r["error"]["reason"], "usage");
    let mut seeded = args.to_vec();
    seeded.extend(["--seed", "3"]);
    let (code, r) = relevance(&seeded);
    assert_eq!(r["result"]["samples"], 220);
    assert!(code == 0 || code == 1);
}

#[test]
fn gapped_decision_outside_the_promise_exits_two() {
    // P = 1/2 at S = {1} sits inside [δ−γ, δ) = [1/4, 3/4)
    let (code, r) = relevance(&[
        "decide-gapped", "--formula", "x1 & x2", "--x", "11", "--k", "1", "--delta", "3/4", "--gamma", "1/2",
        "--seed", "1",
    ]);
    assert_eq!(code, 2, "{r}");
}

#[test]
fn exactly_one_input_source() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("q.json");
    std::fs::write(&file, r#"{"formula": "x1 | x2", "x": "01", "k": 1, "delta": "1"}"#).unwrap();
    let (code, r) = relevance(&["decide", "--input", path(&file)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["witness"], serde_json::json!([2]));
    assert_eq!(r["params"]["input"], path(&file));
    let (code, _) = relevance(&["decide", "--input", path(&file), "--formula", "x1"]);
    assert_eq!(code, 64);
    let (code, _) = relevance(&["decide", "--x", "01", "--k", "1", "--delta", "1"]);
    assert_eq!(code, 64);
}

#[test]
fn unknown_file_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("q.json");
    std::fs::write(&file, r#"{"formula": "x1", "threshold": "1/2"}"#).unwrap();
    let (code, _) = relevance(&["prob", "--input", path(&file)]);
    assert_eq!(code, 64);
}

#[test]
fn caps_refuse_with_exit_65() {
    let (code, r) = relevance(&["shapley", "--formula", "x1 & x2 & x3", "--x", "111", "--shapley-cap", "2"]);
    assert_eq!(code, 65);
    assert!(r["error"]["reason"].is_string());
    let out = Command::new(env!("CARGO_BIN_EXE_relevance"))
        .args(["shapley", "--formula", "x1 & x2 & x3", "--x", "111"])
        .env("RELEVANCE_SHAPLEY_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(report(out).0, 65);
}

#[test]
fn shapley_report_shape() {
    let (code, r) = relevance(&["shapley", "--formula", "(x1&x2)|!x3", "--x", "110"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["phi"], serde_json::json!(["1/12", "1/12", "5/24"]));
    assert_eq!(r["result"]["nu_full"], "3/8");
    assert_eq!(r["result"]["efficiency_check"], true);
}

#[test]
fn chain_through_files_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let [a, b, c] = ["a.json", "b.json", "c.json"].map(|n| dir.path().join(n));
    let (code, _) = relevance(&["reduce", "emajsat-ip1", "--formula", "x1 & (x2 | x3)", "--k", "1", "--write", path(&a)]);
    assert_eq!(code, 0);
    let (code, r) = relevance(&["reduce", "ip1-ip2", "--source", path(&a), "--delta", "3/4", "--write", path(&b)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["gadget"]["combiner"], "or");
    let (code, _) = relevance(&["reduce", "ip2-ri", "--source", path(&b), "--write", path(&c)]);
    assert_eq!(code, 0);
    for (src, red) in [(&a, &b), (&b, &c)] {
        let (code, r) = relevance(&["verify", "--source", path(src), "--reduced", path(red)]);
        assert_eq!(code, 0, "{r}");
        assert_eq!(r["result"]["status"], "pass");
    }
    // a step applied to the wrong kind of instance
    let (code, _) = relevance(&["reduce", "ip2-ri", "--source", path(&a)]);
    assert_eq!(code, 64);
}

#[test]
fn sat_reduction_reports_sizes() {
    let (code, r) = relevance(&["reduce", "sat-ip3", "--formula", "x1 & !x2", "--delta", "1/2", "--gamma", "1/4"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["sizes"], serde_json::json!({"q": 2, "p": 3, "k": 4, "m": 4}));
    assert_eq!(r["result"]["reduced"]["arity"], 11);
}

#[test]
fn inapprox_worked_values() {
    let (code, r) = relevance(&["inapprox-params", "--d", "3", "--delta", "1/2", "--gamma", "1/4", "--alpha", "1/2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["k"], 9);
    assert_eq!(r["result"]["p"], 3);
    assert_eq!(r["result"]["d_prime"], 337);
}

#[test]
fn relu_check_agrees() {
    let (code, r) = relevance(&["compile-relu", "--formula", "(x1 ^ x2) | !x3", "--check"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["agrees"], true);
}

#[test]
fn report_can_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_relevance"))
        .args(["-o", path(&out), "eval", "--formula", "x1 | x2", "--x", "01"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["value"], true);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let (code, r) = relevance(&["frobnicate"]);
    assert_eq!(code, 64);
    assert_eq!(r["error"]["reason"], "usage");
}
