//! The `dpp` binary: outputs, exit codes, file round trips and determinism.

mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::data_path;
use serde_json::Value;

fn dpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpp")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = tmp(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn count_reports_partition_summands() {
    let out = dpp(&["count", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["total"], 59);
    let summands: Vec<u64> = v["summands"].as_array().unwrap().iter().map(|x| x["count"].as_u64().unwrap()).collect();
    assert_eq!(summands.iter().sum::<u64>(), 59);

    let v = json_stdout(&dpp(&["count", "--n", "4"]));
    assert_eq!(v["total"], 28441);

    let out = dpp(&["count", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "MissingMlDegree");
}

#[test]
fn minors_of_example_matrix() {
    let v = json_stdout(&dpp(&["minors", "--matrix", s(&data_path("kernel_matrix.json"))]));
    let p: Vec<f64> = v["p_graded"].as_array().unwrap().iter().map(|z| z[0].as_f64().unwrap()).collect();
    let expected = [1., 8., 22., 18., 151., 135., 360., 2412.];
    for (a, b) in p.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9 * b.max(1.0));
    }
    assert!((v["partition_function"][0].as_f64().unwrap() - 3107.0).abs() < 1e-8);
}

#[test]
fn likelihood_at_example_matrix() {
    let out = dpp(&[
        "likelihood",
        "--matrix",
        s(&data_path("kernel_matrix.json")),
        "--data",
        s(&data_path("kernel_minors_data.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let value = v["value"].as_f64().unwrap();
    let implicit = v["value_implicit"].as_f64().unwrap();
    assert!((value - implicit).abs() < 1e-9 * value.abs());
    assert!(v["gradient_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn solve_then_verify_round_trip() {
    let census = tmp("symmetric_census.json");
    let out = dpp(&["solve", "--data", s(&data_path("symmetric_data.json")), "--out", s(&census)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&census).unwrap()).unwrap();
    assert_eq!(v["complete"], true);
    assert_eq!(v["points"].as_array().unwrap().len(), 13);
    assert_eq!(v["summary"]["positive_definite"], 11);
    assert_eq!(v["summary"]["complex"], 2);

    let out = dpp(&["verify", "--matrix", s(&census), "--data", s(&data_path("symmetric_data.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json_stdout(&out);
    assert_eq!(v["all_ok"], true);
    assert_eq!(v["distinctness"]["all_distinct"], true);
    for p in v["points"].as_array().unwrap() {
        assert_eq!(p["hyperdet"]["vanishes"], true);
        assert!(p["residual"].as_f64().unwrap() < 1e-8);
    }

    // a single emitted point is itself a valid matrix file
    let census: Value = serde_json::from_str(&std::fs::read_to_string(tmp("symmetric_census.json")).unwrap()).unwrap();
    let point = write("one_point.json", &census["points"][0].to_string());
    let out = dpp(&["verify", "--matrix", s(&point), "--data", s(&data_path("symmetric_data.json"))]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn fixed_seed_single_worker_is_deterministic() {
    let data = data_path("zero_entry_data.json");
    let args = ["solve", "--data", s(&data), "--seed", "7", "--workers", "1"];
    let a = dpp(&args);
    let b = dpp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn all_component_and_decouple() {
    let v = json_stdout(&dpp(&["solve", "--data", s(&data_path("zero_entry_data.json")), "--component", "all"]));
    assert_eq!(v["points"].as_array().unwrap().len(), 59);
    let found: Vec<u64> = v["partitions"].as_array().unwrap().iter().map(|p| p["found"].as_u64().unwrap()).collect();
    assert_eq!(found, vec![1, 2, 2, 2, 52]);

    let v = json_stdout(&dpp(&["decouple", "--data", s(&data_path("kernel_minors_data.json")), "--partition", "12|3"]));
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
    for p in v["points"].as_array().unwrap() {
        assert_eq!(p["entries"][0][2][0], 0.0);
        assert_eq!(p["entries"][1][2][0], 0.0);
    }
}

#[test]
fn verify_rejects_non_critical_matrix() {
    let m = write("not_critical.json", r#"{"n": 3, "entries": [[1, 0.5, 0.2], [0.5, 2, 0.1], [0.2, 0.1, 3]]}"#);
    let out = dpp(&["verify", "--matrix", s(&m), "--data", s(&data_path("kernel_minors_data.json"))]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json_stdout(&out)["all_ok"], false);
}

#[test]
fn stopping_short_exits_with_incomplete_code() {
    let options = write("no_loops.json", r#"{"max_loops": 0}"#);
    let out = dpp(&["solve", "--data", s(&data_path("symmetric_data.json")), "--options", s(&options)]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_stdout(&out);
    assert_eq!(v["complete"], false);
    assert!(v["points"].as_array().unwrap().len() < 13);
}

#[test]
fn input_errors_exit_with_code_2() {
    let data = data_path("symmetric_data.json");
    let bad_json = write("bad.json", "{ not json");
    let asymmetric = write("asym.json", r#"{"entries": [[1, 2], [3, 4]]}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["solve", "--data", "/nonexistent/data.json"],
        vec!["solve", "--data", s(&bad_json)],
        vec!["solve", "--data", s(&data), "--component", "other"],
        vec!["solve", "--data", s(&data), "--workers", "0"],
        vec!["solve", "--data", s(&data), "--dedup-tol=-1"],
        vec!["minors", "--matrix", s(&asymmetric)],
        vec!["decouple", "--data", s(&data), "--partition", "12|2"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = dpp(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        if args[0] != "frobnicate" {
            let err: Value = serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("{args:?}"));
            assert!(err["error"].is_string() && err["message"].is_string());
        }
    }
}
