//! End-to-end CLI tests driving the installed binary: subcommand behavior,
//! exit codes, log layout, replay, and report reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_asp-distill"));
    // Always use the bundled solver regardless of the host environment.
    cmd.env("ASP_DISTILL_SOLVER_PATH", env!("CARGO_BIN_EXE_tinyasp"));
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn write_fixtures(dir: &Path) {
    let out = run(&["fixture", "gen", "--out", dir.to_str().unwrap(), "--train", "20", "--test", "10", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corpus_validate_reports_record_count() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run(&["corpus", "validate", dir.path().join("train.jsonl").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("20 record(s)"));

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\":\"x\",\"question_asp\":\"a :- b.\",\"scene_asp\":\"\",\"answer\":\"y\"}\n").unwrap();
    let out = run(&["corpus", "validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corpus_sample_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let train = dir.path().join("train.jsonl");
    let args = [
        "corpus", "sample", train.to_str().unwrap(),
        "--strategy", "relevance", "--pred", "exist", "--k", "5", "--seed", "9",
        "--format", "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout_of(&a), stdout_of(&b));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
    assert_eq!(v["ids"].as_array().unwrap().len(), 5);
}

#[test]
fn theory_mutate_removes_mentioning_rules() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let theory = dir.path().join("theory_full.lp");
    let out_file = dir.path().join("mutated.lp");
    let out = run(&[
        "theory", "mutate", theory.to_str().unwrap(),
        "--remove-pred", "exist", "--out", out_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("removed 2 rule(s)"));
    let mutated = std::fs::read_to_string(&out_file).unwrap();
    assert!(!mutated.contains("exist"));
}

#[test]
fn oracle_check_subcommand_passes() {
    let out = run(&["oracle-check", "--n", "25", "--seed", "3", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["agreed"], 25);
}

#[test]
fn run_then_replay_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let theory = dir.path().join("theory_full.lp");
    let broken = dir.path().join("broken.lp");
    let out = run(&[
        "theory", "mutate", theory.to_str().unwrap(),
        "--remove-pred", "exist", "--out", broken.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    // The removed rules back the oracle.
    let full_text = std::fs::read_to_string(&theory).unwrap();
    let broken_text = std::fs::read_to_string(&broken).unwrap();
    let removed: String = full_text
        .lines()
        .filter(|l| !l.starts_with('%') && !broken_text.contains(l))
        .map(|l| format!("{l}\n"))
        .collect();
    let removed_file = dir.path().join("removed.lp");
    std::fs::write(&removed_file, removed).unwrap();

    let log_dir = dir.path().join("log");
    let out = run(&[
        "run",
        "--init", broken.to_str().unwrap(),
        "--corpus", dir.path().join("train.jsonl").to_str().unwrap(),
        "--backend", "oracle",
        "--oracle-rules", removed_file.to_str().unwrap(),
        "--strategy", "relevance", "--pred", "exist", "--k", "4", "--seed", "5",
        "--log-dir", log_dir.to_str().unwrap(),
        "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for artifact in ["params.json", "transcript.jsonl", "outcomes.jsonl", "theory_final.lp"] {
        assert!(log_dir.join(artifact).is_file(), "missing {artifact}");
    }
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["stats"]["accepted"], 1);

    let replay = run(&["replay", "--log-dir", log_dir.to_str().unwrap()]);
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stderr));
    assert!(stdout_of(&replay).contains("replay ok"));
}

#[test]
fn experiment_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let args = |log: &Path| {
        vec![
            "experiment".to_string(),
            "predicate-removal".to_string(),
            "--pred".to_string(),
            "exist".to_string(),
            "--train".to_string(),
            dir.path().join("train.jsonl").display().to_string(),
            "--test".to_string(),
            dir.path().join("test.jsonl").display().to_string(),
            "--runs".to_string(),
            "2".to_string(),
            "--k".to_string(),
            "4".to_string(),
            "--log-dir".to_string(),
            log.display().to_string(),
            "--format".to_string(),
            "json".to_string(),
        ]
    };
    let log1 = dir.path().join("log1");
    let log2 = dir.path().join("log2");
    let a = bin().args(args(&log1)).output().unwrap();
    let b = bin().args(args(&log2)).output().unwrap();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout_of(&a), stdout_of(&b), "reports are deterministic");
    let r1 = std::fs::read(log1.join("report.json")).unwrap();
    let r2 = std::fs::read(log2.join("report.json")).unwrap();
    assert_eq!(r1, r2, "report files are byte-identical");
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
    assert_eq!(v["aggregate"]["mean"], 100.0);
}

#[test]
fn null_backend_experiment_reports_no_improvement() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let out = run(&[
        "experiment", "random-removal", "--s", "20",
        "--train", dir.path().join("train.jsonl").to_str().unwrap(),
        "--test", dir.path().join("test.jsonl").to_str().unwrap(),
        "--backend", "null", "--runs", "2", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    for run in v["per_run"].as_array().unwrap() {
        assert_eq!(run["final_accuracy"], run["init_accuracy"], "no-improvement semantics");
    }
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["corpus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["nonsense-command"]);
    assert_eq!(out.status.code(), Some(2));
}
