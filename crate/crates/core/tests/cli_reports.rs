use std::path::PathBuf;

use jsonschema::JSONSchema;
use kgt::cli::{main_with, EXIT_FAILED, EXIT_INVALID, EXIT_OK};
use serde_json::Value;

fn schema(name: &str) -> JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    JSONSchema::compile(&value).unwrap()
}

fn run_json(args: &[&str], expected_code: i32) -> Value {
    let mut full = vec!["kgt"];
    full.extend_from_slice(args);
    let out = main_with(full, None);
    assert_eq!(out.code, expected_code, "args {args:?}: {}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    let command = v["command"].as_str().unwrap().to_string();
    let compiled = schema(&command);
    if let Err(errors) = compiled.validate(&v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{command} report violates its schema: {msgs:#?}");
    }
    v
}

#[test]
fn certify_report_matches_schema() {
    let v = run_json(&["certify", "--d", "1000"], EXIT_FAILED);
    assert_eq!(v["parameters"]["d"], 1000);
    assert_eq!(v["parameters"]["epsilon"], "1/4");
    assert_eq!(v["result"]["verdict"], false);
    let v = run_json(&["certify", "--d", "5000", "--epsilon", "0.5", "--gamma", "1/2"], EXIT_FAILED);
    assert_eq!(v["parameters"]["epsilon"], "1/2");
}

#[test]
fn scan_report_matches_schema() {
    let v = run_json(&["scan", "--dmax", "10000", "--seed", "7"], EXIT_FAILED);
    assert_eq!(v["result"]["threshold"], Value::Null);
    assert_eq!(v["parameters"]["seed"], 7);
}

#[test]
fn verify_toric_report_matches_schema() {
    let v = run_json(&["verify-toric"], EXIT_OK);
    assert_eq!(v["result"]["all_pass"], true);
    assert_eq!(v["result"]["z1"], serde_json::json!([5, -1, -1, -1, 2]));
}

#[test]
fn class_number_report_matches_schema() {
    for (disc, h) in [(-3, 1), (-4, 1), (-23, 3), (-47, 5), (-71, 7), (-163, 1)] {
        let d = disc.to_string();
        let v = run_json(&["class-number", "--disc", &d], EXIT_OK);
        assert_eq!(v["result"]["h"], h, "D = {disc}");
    }
}

#[test]
fn indices_report_matches_schema() {
    let v = run_json(&["indices", "--n", "7"], EXIT_OK);
    assert_eq!(v["result"]["index_gamma1"], 48);
    let v = run_json(&["indices", "--n", "1000003"], EXIT_OK);
    assert!(v["result"].get("oracle").is_none());
}

#[test]
fn ehrhart_report_matches_schema() {
    let v = run_json(&["ehrhart", "--k", "4"], EXIT_OK);
    let counts: Vec<u64> = v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![1, 50, 252, 715, 1547]);
}

#[test]
fn congruence_report_matches_schema() {
    for d in [1, 2, 12, 30, 97, 1000] {
        let s = d.to_string();
        let v = run_json(&["congruence", "--d", &s], EXIT_OK);
        assert_eq!(v["result"]["check"]["order"], 12 * d);
    }
}

#[test]
fn ehrhart_csv_is_a_table() {
    let out = main_with(["kgt", "ehrhart", "--k", "2", "--output", "csv"], None);
    assert_eq!(out.code, EXIT_OK);
    let mut r = csv::Reader::from_reader(out.stdout.as_bytes());
    let headers = r.headers().unwrap().clone();
    assert_eq!(&headers[7], "dilate");
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[2][8], "252");
    assert!(out.stdout.ends_with("\r\n"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["kgt", "scan", "--dmax", "5000", "--seed", "3"],
        vec!["kgt", "certify", "--d", "48", "--output", "csv"],
        vec!["kgt", "verify-toric"],
    ] {
        let a = main_with(args.clone(), Some("40"));
        let b = main_with(args.clone(), Some("40"));
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn slack_is_echoed() {
    let out = main_with(["kgt", "certify", "--d", "48"], Some("20"));
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["parameters"]["slack_bits"], 20);
}

#[test]
fn invalid_input_exit_code() {
    for args in [
        vec!["kgt", "certify"],
        vec!["kgt", "certify", "--d", "47"],
        vec!["kgt", "class-number", "--disc", "5"],
        vec!["kgt", "class-number", "--disc", "-1"],
        vec!["kgt", "ehrhart", "--k", "100000"],
        vec!["kgt", "scan", "--epsilon", "abc"],
        vec!["kgt", "indices", "--n", "6", "--output", "xml"],
    ] {
        assert_eq!(main_with(args.clone(), None).code, EXIT_INVALID, "{args:?}");
    }
}
