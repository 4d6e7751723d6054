//! Contract tests for the command-line surface: exit codes, format guards,
//! and reproducible output.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rpci"))
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = bin().args(args).output().expect("binary runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn failing_point_exits_one() {
    let (stdout, _, code) = run(&["check", "3"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("holds              = false"));
}

#[test]
fn holding_point_exits_zero() {
    let (stdout, _, code) = run(&["check", "100"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("holds              = true"));
}

#[test]
fn usage_error_exits_two() {
    let (_, _, code) = run(&["no-such-command"]);
    assert_eq!(code, 2);
    let (_, _, code) = run(&["check"]);
    assert_eq!(code, 2);
}

#[test]
fn resource_limit_exits_three() {
    let (_, stderr, code) = run(&["pi", "200000000000"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("ceiling"));
}

#[test]
fn csv_is_scan_only() {
    let (_, stderr, code) = run(&["check", "100", "--format", "csv"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("csv"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["scan", "2", "12", "--format", "csv"];
    let (a, _, _) = run(&args);
    let (b, _, _) = run(&args);
    assert!(!a.is_empty());
    assert_eq!(a, b);

    let args = ["certify", "--use-paper-constants", "--omit-timestamp", "--format", "json"];
    let (a, _, _) = run(&args);
    let (b, _, _) = run(&args);
    assert_eq!(a, b);
}

#[test]
fn json_numerics_are_interval_string_pairs() {
    let (stdout, _, _) = run(&["check", "100", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let rhs = v["rhs"].as_array().unwrap();
    assert_eq!(rhs.len(), 2);
    assert!(rhs.iter().all(|e| e.is_string()));
    let alpha = v["alpha"].as_array().unwrap();
    assert!(alpha.iter().all(|e| e.is_string()));
    // the two-sided comparison stays exact: lhs is a decimal string
    assert!(v["lhs"].is_string());
}

#[test]
fn alpha_symbol_and_decimal_agree_on_floor() {
    let (sym, _, _) = run(&["check", "100", "--format", "json"]);
    let (dec, _, _) = run(&["check", "100", "--alpha", "2.718281828459045", "--format", "json"]);
    let a: serde_json::Value = serde_json::from_str(&sym).unwrap();
    let b: serde_json::Value = serde_json::from_str(&dec).unwrap();
    assert_eq!(a["floor_x_over_alpha"], b["floor_x_over_alpha"]);
    assert_eq!(a["holds"], b["holds"]);
}
