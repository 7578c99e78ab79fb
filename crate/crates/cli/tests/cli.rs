use std::fs;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

use dioph_cli::{execute, replay, resolve, CliError, Flags};

fn dioph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dioph")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_row_for_half() {
    let o = dioph(&["count", "--x", "1/2", "--delta", "3/10", "--N", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,q_lo,q_hi,threshold,count,bound,pass"));
    assert_eq!(lines.next(), Some(",0,10,3/10,5,2,pass"));
    assert!(!text.contains('\r'));
}

#[test]
fn transference_for_golden_pair_passes() {
    let o = dioph(&["transference", "--x", "golden,golden", "--H", "1000", "--Qmax", "100000", "--slack", "0.05", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["transference"], "pass");
}

#[test]
fn json_keys_are_sorted() {
    let o = dioph(&["count", "--x", "1/2", "--delta", "3/10", "--N", "10", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn exit_statuses() {
    let bad_psi = dioph(&["count", "--x", "1/2", "--psi", "q^-zz", "--N", "10"]);
    assert_eq!(bad_psi.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_psi.stderr).contains("q^-A"));
    let budget = dioph(&["count", "--x", "1/2", "--delta", "1/10", "--N", "1000000000", "--max-scan", "1000"]);
    assert_eq!(budget.status.code(), Some(3));
    let missing = dioph(&["replay", "/nonexistent/result.csv"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"x": "1/2", "delta": "3/10", "N": 100}"#).unwrap();
    let o = dioph(&["count", "--config", cfg.to_str().unwrap(), "--N", "10"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(",0,10,3/10,5,2,pass"));
    fs::write(&cfg, r#"{"x": "1/2", "bogus": 1}"#).unwrap();
    assert_eq!(dioph(&["count", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn replay_detects_table_and_default_drift() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let p = out.to_str().unwrap();
    assert!(dioph(&["count", "--x", "sqrt2m1", "--delta", "1/10", "--N", "1000", "--output", p]).status.success());
    assert!(dioph(&["replay", p]).status.success());

    let csv = fs::read_to_string(&out).unwrap();
    fs::write(&out, csv.replace(",399,", ",400,").replace("1000,1/10,", "1000,1/10,x")).unwrap();
    let o = dioph(&["replay", p]);
    assert_eq!(o.status.code(), Some(5));
    fs::write(&out, csv).unwrap();

    let sc = format!("{p}.config.json");
    let mut meta: Value = serde_json::from_str(&fs::read_to_string(&sc).unwrap()).unwrap();
    meta["defaults"]["max-scan"] = Value::from(5);
    fs::write(&sc, serde_json::to_string_pretty(&meta).unwrap() + "\n").unwrap();
    let o = dioph(&["replay", p]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("defaults.max-scan"));
}

#[test]
fn seeded_monte_carlo_replays() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    let p = p.to_str().unwrap();
    let args = ["measure", "--x", "sqrt2m1", "--psi", "q^-1/2", "--Qmax", "1000", "--sampling", "monte-carlo", "--points", "40", "--seed", "7", "--format", "json", "--output", p];
    assert!(dioph(&args).status.success());
    assert!(dioph(&["replay", p]).status.success());
}

fn count_flags(x: String, delta: String, n: u64, out: String) -> Flags {
    Flags { x: Some(x), delta: Some(delta), n: Some(n), output: Some(out), ..Flags::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_count_run_replays(p in 0i64..50, d in 1i64..50, num in 1i64..10, n in 1u64..3000, json in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out").to_str().unwrap().to_string();
        let mut f = count_flags(format!("{p}/{d}"), format!("{num}/10"), n, path.clone());
        if json {
            f.format = Some("json".into());
        }
        let r = resolve("count", &f).unwrap();
        let first = execute(&r).unwrap();
        let again = replay(&path).unwrap();
        prop_assert_eq!(first, again);
    }
}

#[test]
fn unknown_command_is_a_config_error() {
    let e = resolve("frobnicate", &Flags::default()).unwrap_err();
    assert!(matches!(e, CliError::Config(_)));
    assert_eq!(e.exit_code(), 2);
}
