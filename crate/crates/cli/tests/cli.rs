use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fasep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fasep"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn simulate_is_byte_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["simulate", "-L", "30", "-N", "12", "--p", "0.3", "--t-end", "5", "--runs", "3", "--snapshot-every", "1"];
    assert_eq!(code(&fasep(a.path(), &args)), 0);
    assert_eq!(code(&fasep(b.path(), &args)), 0);
    let x = fs::read(a.path().join("simulate.jsonl")).unwrap();
    let y = fs::read(b.path().join("simulate.jsonl")).unwrap();
    assert_eq!(x, y);
    assert_eq!(lines(&a.path().join("simulate.jsonl")).len(), 4);
}

#[test]
fn different_seeds_differ() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["simulate", "-L", "30", "-N", "12", "--p", "0.3", "--t-end", "5"];
    fasep(a.path(), &[&args[..], &["--seed", "1"]].concat());
    fasep(b.path(), &[&args[..], &["--seed", "2"]].concat());
    let x = lines(&a.path().join("simulate.jsonl"));
    let y = lines(&b.path().join("simulate.jsonl"));
    assert_ne!(x[1], y[1]);
    assert_ne!(x[0], y[0], "header carries the experiment hash");
}

#[test]
fn to_frozen_on_crowded_ring_exits_3() {
    let d = TempDir::new().unwrap();
    let out = fasep(d.path(), &["simulate", "-L", "10", "-N", "5", "--p", "0.5", "--to-frozen"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("L/2"));
}

#[test]
fn lone_particle_is_frozen_at_once() {
    let d = TempDir::new().unwrap();
    let out = fasep(d.path(), &["simulate", "--initial", "ring:0100", "--p", "0.5", "--to-frozen"]);
    assert_eq!(code(&out), 0);
    let rec: serde_json::Value = serde_json::from_str(&lines(&d.path().join("simulate.jsonl"))[1]).unwrap();
    assert_eq!(rec["events"], 0);
    assert_eq!(rec["final"], "ring:0100");
}

#[test]
fn exact_reports_p_independence() {
    let d = TempDir::new().unwrap();
    let out = fasep(d.path(), &["exact", "-L", "8", "-N", "3", "--p", "1/4,3/4"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(d.path().join("exact_verdict.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["result"]["p_independent"], true);
    assert_eq!(v["result"]["matches_closed_form"], true);
    assert_eq!(lines(&d.path().join("exact_p1_4.csv")), lines(&d.path().join("exact_p3_4.csv")));
}

#[test]
fn exact_stationary_is_uniform() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fasep(d.path(), &["exact", "-L", "6", "-N", "4", "--p", "0.5"])), 0);
    let rows = lines(&d.path().join("exact_p0.5.csv"));
    assert!(rows[0].starts_with("# fasep "));
    assert_eq!(rows[1], "config,numerator,denominator");
    assert_eq!(rows.len(), 2 + 9);
    assert!(rows[2..].iter().all(|r| r.ends_with(",1,9")));
}

#[test]
fn exact_beyond_cap_exits_4() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fasep(d.path(), &["exact", "-L", "20", "-N", "3"])), 4);
}

#[test]
fn corrupted_config_exits_2() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("broken.toml");
    fs::write(&cfg, "len = [unterminated").unwrap();
    let out = fasep(d.path(), &["--config", cfg.to_str().unwrap(), "verify"]);
    assert_eq!(code(&out), 2);
    let unknown = d.path().join("unknown.json");
    fs::write(&unknown, r#"{"lenght": 5}"#).unwrap();
    assert_eq!(code(&fasep(d.path(), &["--config", unknown.to_str().unwrap(), "exact"])), 2);
}

#[test]
fn config_file_selects_command() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("exp.toml");
    fs::write(&cfg, "command = \"exact\"\nlen = 7\nparticles = 2\np = [0, 1]\n").unwrap();
    assert_eq!(code(&fasep(d.path(), &["--config", cfg.to_str().unwrap()])), 0);
    assert!(d.path().join("exact_p0.csv").exists());
    assert!(d.path().join("exact_p1.csv").exists());
}

#[test]
fn flags_override_config() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("exp.json");
    fs::write(&cfg, r#"{"len": 7, "particles": 2, "p": ["1/2"]}"#).unwrap();
    let out = fasep(d.path(), &["--config", cfg.to_str().unwrap(), "exact", "-N", "3"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("N = 3"));
}

#[test]
fn bad_arguments_exit_2() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fasep(d.path(), &["simulate", "-L", "10", "-N", "3", "--p", "0.5"])), 2);
    assert_eq!(code(&fasep(d.path(), &["simulate", "-L", "10", "-N", "3", "--p", "1.5", "--t-end", "1"])), 2);
    assert_eq!(code(&fasep(d.path(), &["simulate", "--initial", "ring:01x", "--p", "1", "--t-end", "1"])), 2);
    assert_eq!(code(&fasep(d.path(), &["exact", "-L", "8"])), 2);
    assert_eq!(code(&fasep(d.path(), &[])), 2);
}

#[test]
fn coupled_runs_report_no_violations() {
    let d = TempDir::new().unwrap();
    let out = fasep(d.path(), &["couple", "-L", "20", "-N", "9", "--p", "0.7", "--max-events", "3000", "--runs", "2"]);
    assert_eq!(code(&out), 0);
    let rows = lines(&d.path().join("couple.jsonl"));
    assert_eq!(rows.len(), 3);
    let run: serde_json::Value = serde_json::from_str(&rows[1]).unwrap();
    assert_eq!(run["violations"], 0);
    assert_eq!(run["final_state"]["events"], 3000);
}

#[test]
fn verify_single_criterion() {
    let d = TempDir::new().unwrap();
    let out = fasep(d.path(), &["verify", "--criterion", "5"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("criterion 5 PASS"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["result"][0]["pass"], true);
}
