use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn neurodyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neurodyn"))
        .args(args)
        .env_remove("NEURODYN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn trajectory_starts_at_initial_logit() {
    let out = neurodyn(&["trajectory", "--u0", "0.5", "--norm", "0.7", "--p", "0.5", "--t-end", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u,confidence"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], 0.5);
    assert_eq!(text.lines().count(), 102);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!(last[1] > 0.5);
}

#[test]
fn json_output_has_columns_and_rows() {
    let out = neurodyn(&["trajectory", "--u0", "0.5", "--t-end", "0.1", "--step", "0.05", "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(["t", "u", "confidence"]));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], 0.5);
}

#[test]
fn phase_scan_covers_the_grid() {
    let out = neurodyn(&["phase-scan", "--grid", "5", "--t-end", "50"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 25);
}

#[test]
fn starvation_table_has_eight_cells() {
    let out = neurodyn(&["starvation", "--table1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 8);
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        &["trajectory", "--u0", "0.5", "--norm", "-1"][..],
        &["trajectory", "--u0", "0.5", "--bogus", "1"],
        &["trajectory", "--u0", "0.5", "--class", "2"],
        &["deep-logit", "--depth", "3"],
    ] {
        let out = neurodyn(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains("error"), "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_invalid() {
    let out = Command::new(env!("CARGO_BIN_EXE_neurodyn"))
        .args(["starvation", "--table1"])
        .env("NEURODYN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("NEURODYN_THREADS"));
}

#[test]
fn thread_cap_keeps_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_neurodyn"))
            .args(["simulate", "mode-fleet", "--runs", "20", "--steps", "20"])
            .env("NEURODYN_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missed_horizon_exits_three() {
    let out = neurodyn(&["simulate", "starvation", "--lambdas", "0.1", "--deltas", "0.001", "--max-steps", "10"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out.csv");
    let out = neurodyn(&["starvation", "--table1", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn empty_scenario_list_is_a_no_op() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"version": 1, "scenarios": []}"#);
    let out = neurodyn(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("ran 0 scenarios"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_errors_name_the_problem() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            r#"{"version": 1, "scenarios": [{"name": "s", "command": "deep-logit", "output": "a.csv", "parameters": {}}]}"#,
            "--u0",
        ),
        (
            r#"{"version": 1, "scenarios": [{"name": "s", "command": "starvation", "output": "a.csv", "parameters": {"tabel1": true}}]}"#,
            "tabel1",
        ),
        (r#"{"version": 2, "scenarios": []}"#, "version 2"),
        (
            r#"{"version": 1, "scenarios": [{"name": "s", "command": "nope", "output": "a.csv", "parameters": {}}]}"#,
            "nope",
        ),
        (
            r#"{"version": 1, "scenarios": [
                {"name": "s", "command": "starvation", "output": "a.csv", "parameters": {"table1": true}},
                {"name": "s", "command": "starvation", "output": "b.csv", "parameters": {"table1": true}}]}"#,
            "duplicate",
        ),
        (
            r#"{"version": 1, "scenarios": [{"name": "s", "command": "trajectory", "output": "a.csv", "parameters": {"u0": 0.5, "p": 2}}]}"#,
            "scenario 's'",
        ),
    ];
    for (body, needle) in cases {
        let cfg = write_config(dir.path(), body);
        let out = neurodyn(&["run", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "expected '{needle}' in: {}", stderr(&out));
    }
    assert!(!dir.path().join("a.csv").exists(), "validation must precede any run");
}

#[test]
fn scenarios_write_next_to_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"version": 1, "scenarios": [
            {"name": "t", "command": "trajectory", "output": "out/t.json", "format": "json",
             "parameters": {"u0": 0.5, "t_end": 1}},
            {"name": "w", "command": "starvation", "output": "out/w.csv", "parameters": {"table1": true}}]}"#,
    );
    let out = neurodyn(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/t.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 101);
    assert_eq!(fs::read_to_string(dir.path().join("out/w.csv")).unwrap().lines().count(), 9);
}

#[test]
fn check_only_validates() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"version": 1, "scenarios": [{"name": "w", "command": "starvation", "output": "w.csv", "parameters": {"table1": true}}]}"#,
    );
    let out = neurodyn(&["run", cfg.to_str().unwrap(), "--check"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(!dir.path().join("w.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"version": 1, "scenarios": [
            {"name": "sgd", "command": "simulate", "output": "sgd.csv",
             "parameters": {"experiment": "logit", "setup": "random", "seed": 9, "steps": 500, "lr": 0.05}},
            {"name": "fleet", "command": "simulate", "output": "fleet.csv",
             "parameters": {"experiment": "mode-fleet", "runs": 30, "steps": 30}},
            {"name": "starve", "command": "simulate", "output": "starve.csv",
             "parameters": {"experiment": "starvation", "lambdas": [0.5], "runs": 2}}]}"#,
    );
    let read = |tag: &str| {
        let out_dir = dir.path().join(tag);
        let out = neurodyn(&["run", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        ["sgd.csv", "fleet.csv", "starve.csv"].map(|f| fs::read(out_dir.join(f)).unwrap())
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn figures_config_runs_end_to_end() {
    let root = repo_root();
    let dir = TempDir::new().unwrap();
    let out = neurodyn(&[
        "run",
        root.join("figures.json").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let config: serde_json::Value = serde_json::from_str(&fs::read_to_string(root.join("figures.json")).unwrap()).unwrap();
    let scenarios = config["scenarios"].as_array().unwrap();
    let mut commands: Vec<&str> = scenarios.iter().map(|s| s["command"].as_str().unwrap()).collect();
    commands.sort();
    commands.dedup();
    assert_eq!(
        commands,
        ["deep-logit", "hinge-compare", "phase-scan", "simulate", "starvation", "time-ratio", "trajectory"]
    );
    for s in scenarios {
        let path = dir.path().join(s["output"].as_str().unwrap());
        let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(text.lines().count() > 1, "{} is empty", path.display());
    }
}
