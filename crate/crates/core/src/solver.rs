//! External ASP solver integration.
//!
//! A solver run is one subprocess: the theory, question, and scene programs
//! are concatenated and piped to the executable, stdout/stderr are captured,
//! and the result is classified into a [`SolverOutcome`]. The output parser
//! accepts both the human-readable `Answer:`/`SATISFIABLE` format and the
//! `--outf=2` JSON format, so clingo and the bundled tinyasp binary are
//! interchangeable behind [`SolverConfig::executable`].

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::asp::{self, Program};

/// Syntax-error text handed to the mending loop is capped at this length.
pub const SYNTAX_MESSAGE_CAP: usize = 2000;

pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("solver executable not found: {path}")]
    ExecutableNotFound { path: PathBuf },
    #[error("solver process failure: {detail}")]
    ProcessFailure { detail: String },
    #[error("no ASP solver available: set solver.path, ASP_DISTILL_SOLVER, or install clingo/tinyasp")]
    NoSolverAvailable,
    #[error("solver rejected input: {message}")]
    RejectedInput { message: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub executable: PathBuf,
    pub extra_flags: Vec<String>,
    pub timeout_ms: u64,
    pub answer_predicate: String,
}

impl SolverConfig {
    pub fn new(executable: impl Into<PathBuf>) -> SolverConfig {
        SolverConfig {
            executable: executable.into(),
            extra_flags: Vec::new(),
            timeout_ms: DEFAULT_TIMEOUT_MS,
            answer_predicate: "ans".to_string(),
        }
    }

    /// Locate a usable solver: `ASP_DISTILL_SOLVER`, then `clingo` on PATH,
    /// then a `tinyasp` binary shipped next to the current executable, then
    /// `tinyasp` on PATH.
    pub fn resolve_default() -> Result<SolverConfig, SolverError> {
        if let Ok(path) = std::env::var("ASP_DISTILL_SOLVER") {
            if !path.is_empty() {
                return Ok(SolverConfig::new(path));
            }
        }
        if let Some(path) = find_in_path("clingo") {
            return Ok(SolverConfig::new(path));
        }
        if let Ok(exe) = std::env::current_exe() {
            for dir in exe.ancestors().skip(1).take(3) {
                let candidate = dir.join("tinyasp");
                if candidate.is_file() {
                    return Ok(SolverConfig::new(candidate));
                }
            }
        }
        if let Some(path) = find_in_path("tinyasp") {
            return Ok(SolverConfig::new(path));
        }
        Err(SolverError::NoSolverAvailable)
    }
}

fn find_in_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(name))
        .find(|p| p.is_file())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    SyntaxError,
    NoAnswerSet,
    Answered,
    Timeout,
}

/// Classified result of one solver run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub kind: OutcomeKind,
    /// Diagnostic text; present exactly for `SyntaxError`.
    pub message: Option<String>,
    /// One answer per model, best model first; nonempty exactly for `Answered`.
    pub answers: Vec<String>,
    pub elapsed_ms: u64,
}

impl SolverOutcome {
    pub fn answer(&self) -> Option<&str> {
        self.answers.first().map(String::as_str)
    }
}

/// Raw enumeration result, before answer extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawResult {
    Satisfiable(Vec<Vec<String>>),
    Unsatisfiable,
    SyntaxError(String),
    Timeout,
}

struct RunOutput {
    status: Option<i32>,
    stdout: String,
    stderr: String,
    timed_out: bool,
    elapsed: Duration,
}

fn run_solver(input: &str, cfg: &SolverConfig) -> Result<RunOutput, SolverError> {
    let start = Instant::now();
    let mut cmd = Command::new(&cfg.executable);
    cmd.arg("--models=0");
    cmd.args(&cfg.extra_flags);
    cmd.arg("-");
    cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            SolverError::ExecutableNotFound { path: cfg.executable.clone() }
        } else {
            SolverError::ProcessFailure { detail: e.to_string() }
        }
    })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input_owned = input.to_string();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(input_owned.as_bytes());
        // stdin drops here, closing the pipe.
    });
    let mut stdout_pipe = child.stdout.take().expect("piped stdout");
    let mut stderr_pipe = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        use std::io::Read;
        let _ = stdout_pipe.read_to_string(&mut buf);
        buf
    });
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        use std::io::Read;
        let _ = stderr_pipe.read_to_string(&mut buf);
        buf
    });

    let deadline = start + Duration::from_millis(cfg.timeout_ms);
    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status.code(),
            Ok(None) => {
                if Instant::now() >= deadline {
                    // Kill and reap so no solver process outlives the call.
                    let _ = child.kill();
                    let _ = child.wait();
                    timed_out = true;
                    break None;
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => return Err(SolverError::ProcessFailure { detail: e.to_string() }),
        }
    };
    if timed_out {
        // Output is irrelevant and the pipes may be held open by leftover
        // grandchildren; do not block on the reader threads.
        return Ok(RunOutput {
            status,
            stdout: String::new(),
            stderr: String::new(),
            timed_out,
            elapsed: start.elapsed(),
        });
    }
    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    Ok(RunOutput { status, stdout, stderr, timed_out, elapsed: start.elapsed() })
}

fn truncate_message(text: &str) -> String {
    let trimmed = text.trim();
    if trimmed.len() <= SYNTAX_MESSAGE_CAP {
        trimmed.to_string()
    } else {
        let mut cut = SYNTAX_MESSAGE_CAP;
        while !trimmed.is_char_boundary(cut) {
            cut -= 1;
        }
        trimmed[..cut].to_string()
    }
}

/// Parse solver stdout into models. Understands the human-readable
/// `Answer:`/`SATISFIABLE` format and clingo-style `--outf=2` JSON.
fn parse_models(stdout: &str) -> Option<RawResult> {
    let trimmed = stdout.trim_start();
    if trimmed.starts_with('{') {
        return parse_json_models(trimmed);
    }

    let mut models: Vec<Vec<String>> = Vec::new();
    let mut saw_sat = false;
    let mut saw_unsat = false;
    let mut optimized = false;
    let mut lines = stdout.lines().peekable();
    while let Some(line) = lines.next() {
        let line_t = line.trim();
        if line_t.starts_with("Answer:") {
            let atoms_line = lines.next().unwrap_or("");
            let atoms: Vec<String> =
                atoms_line.split_whitespace().map(str::to_string).collect();
            models.push(atoms);
        } else if line_t.starts_with("Optimization:") {
            optimized = true;
        } else if line_t == "SATISFIABLE" || line_t.starts_with("OPTIMUM FOUND") {
            saw_sat = true;
        } else if line_t == "UNSATISFIABLE" {
            saw_unsat = true;
        }
    }
    if saw_unsat {
        return Some(RawResult::Unsatisfiable);
    }
    if saw_sat || !models.is_empty() {
        if optimized {
            // With optimization the best model is printed last; callers want it first.
            models.reverse();
        }
        return Some(RawResult::Satisfiable(models));
    }
    None
}

fn parse_json_models(text: &str) -> Option<RawResult> {
    let v: serde_json::Value = serde_json::from_str(text).ok()?;
    let result = v.get("Result")?.as_str()?;
    if result.starts_with("UNSAT") {
        return Some(RawResult::Unsatisfiable);
    }
    let mut models = Vec::new();
    if let Some(calls) = v.get("Call").and_then(|c| c.as_array()) {
        for call in calls {
            if let Some(witnesses) = call.get("Witnesses").and_then(|w| w.as_array()) {
                for w in witnesses {
                    let atoms: Vec<String> = w
                        .get("Value")
                        .and_then(|vals| vals.as_array())
                        .map(|vals| {
                            vals.iter()
                                .filter_map(|a| a.as_str().map(str::to_string))
                                .collect()
                        })
                        .unwrap_or_default();
                    models.push(atoms);
                }
            }
        }
    }
    Some(RawResult::Satisfiable(models))
}

fn looks_like_input_error(run: &RunOutput) -> bool {
    let text = format!("{}\n{}", run.stderr, run.stdout).to_lowercase();
    run.status == Some(65)
        || text.contains("syntax error")
        || text.contains("parsing failed")
        || text.contains("parse error")
        || text.contains("unsafe")
        || text.contains("error:")
}

/// Run the solver over `input` and return the raw enumeration.
pub fn enumerate_models(input: &str, cfg: &SolverConfig) -> Result<(RawResult, Duration), SolverError> {
    let run = run_solver(input, cfg)?;
    if run.timed_out {
        return Ok((RawResult::Timeout, run.elapsed));
    }
    match parse_models(&run.stdout) {
        Some(result) => Ok((result, run.elapsed)),
        None => {
            if looks_like_input_error(&run) {
                let msg = if run.stderr.trim().is_empty() { &run.stdout } else { &run.stderr };
                Ok((RawResult::SyntaxError(truncate_message(msg)), run.elapsed))
            } else {
                Err(SolverError::ProcessFailure {
                    detail: format!(
                        "unrecognized solver output (exit {:?}): {}",
                        run.status,
                        truncate_message(&format!("{}\n{}", run.stdout, run.stderr))
                    ),
                })
            }
        }
    }
}

/// Extract the answer carried by one model: the term of the designated
/// `answer_predicate/1` atom. With several such atoms the lexicographically
/// smallest value is taken, so the choice is deterministic.
fn model_answer(atoms: &[String], answer_predicate: &str) -> Option<String> {
    let prefix = format!("{answer_predicate}(");
    let mut values: Vec<&str> = atoms
        .iter()
        .filter_map(|a| {
            let inner = a.strip_prefix(&prefix)?.strip_suffix(')')?;
            // Arity-1 check: no top-level comma.
            let mut depth = 0usize;
            for c in inner.chars() {
                match c {
                    '(' => depth += 1,
                    ')' => depth = depth.saturating_sub(1),
                    ',' if depth == 0 => return None,
                    _ => {}
                }
            }
            Some(inner)
        })
        .collect();
    values.sort_unstable();
    values.first().map(|s| s.to_string())
}

/// Solve theory ∪ question ∪ scene and classify the outcome.
pub fn solve(
    theory: &Program,
    question: &Program,
    scene: &Program,
    cfg: &SolverConfig,
) -> Result<SolverOutcome, SolverError> {
    let input = format!("{}\n{}\n{}", theory.to_text(), question.to_text(), scene.to_text());
    solve_text(&input, cfg)
}

/// Solve an already-concatenated program text.
pub fn solve_text(input: &str, cfg: &SolverConfig) -> Result<SolverOutcome, SolverError> {
    let (raw, elapsed) = enumerate_models(input, cfg)?;
    let elapsed_ms = elapsed.as_millis() as u64;
    let outcome = match raw {
        RawResult::Timeout => SolverOutcome {
            kind: OutcomeKind::Timeout,
            message: None,
            answers: Vec::new(),
            elapsed_ms,
        },
        RawResult::SyntaxError(message) => SolverOutcome {
            kind: OutcomeKind::SyntaxError,
            message: Some(if message.is_empty() { "syntax error".to_string() } else { message }),
            answers: Vec::new(),
            elapsed_ms,
        },
        RawResult::Unsatisfiable => SolverOutcome {
            kind: OutcomeKind::NoAnswerSet,
            message: None,
            answers: Vec::new(),
            elapsed_ms,
        },
        RawResult::Satisfiable(models) => {
            let answers: Vec<String> = models
                .iter()
                .filter_map(|m| model_answer(m, &cfg.answer_predicate))
                .collect();
            if answers.is_empty() {
                SolverOutcome {
                    kind: OutcomeKind::NoAnswerSet,
                    message: None,
                    answers: Vec::new(),
                    elapsed_ms,
                }
            } else {
                SolverOutcome { kind: OutcomeKind::Answered, message: None, answers, elapsed_ms }
            }
        }
    };
    Ok(outcome)
}

/// Lowercase, trim, strip one layer of surrounding quotes.
pub fn normalize_answer(ans: &str) -> String {
    let t = ans.trim();
    let t = t.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(t);
    t.trim().to_lowercase()
}

/// Does the outcome carry the expected answer (after normalization)?
pub fn check_answer(outcome: &SolverOutcome, expected: &str) -> bool {
    outcome.kind == OutcomeKind::Answered
        && outcome
            .answers
            .first()
            .is_some_and(|a| normalize_answer(a) == normalize_answer(expected))
}

/// Canonical form of a model set for comparison across solvers.
fn canonical(models: Vec<Vec<String>>) -> std::collections::BTreeSet<Vec<String>> {
    models
        .into_iter()
        .map(|mut m| {
            m.sort_unstable();
            m
        })
        .collect()
}

/// Compare the external solver's full enumeration of `theory` against the
/// internal brute-force checker.
pub fn cross_validate(theory: &Program, cfg: &SolverConfig) -> Result<bool, SolverError> {
    let ours = asp::enumerate_answer_sets(theory).map_err(|e| SolverError::RejectedInput {
        message: format!("internal checker rejected program: {e}"),
    })?;
    let ours = canonical(ours.into_iter().map(|i| i.atom_names()).collect());

    let (raw, _) = enumerate_models(&theory.to_text(), cfg)?;
    let theirs = match raw {
        RawResult::Satisfiable(models) => canonical(models),
        RawResult::Unsatisfiable => Default::default(),
        RawResult::SyntaxError(message) => return Err(SolverError::RejectedInput { message }),
        RawResult::Timeout => {
            return Err(SolverError::ProcessFailure { detail: "timeout during cross-validation".into() })
        }
    };
    Ok(ours == theirs)
}

/// A seeded random ground normal program over at most `max_atoms`
/// propositional atoms and `max_rules` rules (constraints included), for
/// cross-validating the brute-force checker against an external solver.
pub fn random_ground_program(seed: u64, max_atoms: usize, max_rules: usize) -> Program {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n_atoms = rng.gen_range(1..=max_atoms.max(1));
    let atoms: Vec<String> = (0..n_atoms).map(|i| format!("{}", (b'a' + i as u8) as char)).collect();
    let n_rules = rng.gen_range(0..=max_rules);
    let mut text = String::new();
    for _ in 0..n_rules {
        let head: Option<&str> =
            if rng.gen_bool(0.1) { None } else { Some(&atoms[rng.gen_range(0..n_atoms)]) };
        let n_pos = rng.gen_range(0..=3.min(n_atoms));
        let n_neg = rng.gen_range(0..=2.min(n_atoms));
        let mut body: Vec<String> = Vec::new();
        let mut used: Vec<usize> = Vec::new();
        for negated in [false, true] {
            let count = if negated { n_neg } else { n_pos };
            for _ in 0..count {
                let i = rng.gen_range(0..n_atoms);
                if used.contains(&i) {
                    continue;
                }
                used.push(i);
                body.push(if negated { format!("not {}", atoms[i]) } else { atoms[i].clone() });
            }
        }
        match (head, body.is_empty()) {
            (Some(h), true) => text.push_str(&format!("{h}.\n")),
            (Some(h), false) => text.push_str(&format!("{h} :- {}.\n", body.join(", "))),
            (None, true) => {} // empty constraint would reject everything; skip
            (None, false) => text.push_str(&format!(":- {}.\n", body.join(", "))),
        }
    }
    crate::asp::parse_program(&text).expect("generated program parses")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub programs: usize,
    pub agreed: usize,
    pub disagreements: Vec<u64>,
}

/// Cross-validate `n` seeded random programs; returns which seeds disagreed.
pub fn oracle_check(n: usize, base_seed: u64, cfg: &SolverConfig) -> Result<OracleCheckReport, SolverError> {
    let mut disagreements = Vec::new();
    for i in 0..n {
        let seed = base_seed.wrapping_add(i as u64);
        let program = random_ground_program(seed, 8, 12);
        if !cross_validate(&program, cfg)? {
            disagreements.push(seed);
        }
    }
    Ok(OracleCheckReport { programs: n, agreed: n - disagreements.len(), disagreements })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_programs_are_ground_normal_and_small() {
        for seed in 0..50 {
            let p = random_ground_program(seed, 8, 12);
            assert!(p.len() <= 12);
            assert!(p.iter().all(|r| r.is_ground() && !r.is_passthrough()));
        }
    }

    #[test]
    fn parses_human_output() {
        let out = "tinyasp version 0.1.0\nSolving...\nAnswer: 1\nans(yes) holds(0,1)\nAnswer: 2\n\nSATISFIABLE\n";
        match parse_models(out) {
            Some(RawResult::Satisfiable(models)) => {
                assert_eq!(models.len(), 2);
                assert_eq!(models[0], vec!["ans(yes)", "holds(0,1)"]);
                assert!(models[1].is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_unsat_output() {
        assert_eq!(parse_models("Solving...\nUNSATISFIABLE\n"), Some(RawResult::Unsatisfiable));
    }

    #[test]
    fn parses_json_output() {
        let out = r#"{"Solver": "x", "Result": "SATISFIABLE", "Call": [{"Witnesses": [{"Value": ["a", "ans(2)"]}]}], "Models": {"Number": 1, "More": "no"}}"#;
        match parse_models(out) {
            Some(RawResult::Satisfiable(models)) => assert_eq!(models, vec![vec!["a", "ans(2)"]]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn optimization_reorders_models() {
        let out = "Answer: 1\nans(a)\nOptimization: 3\nAnswer: 2\nans(b)\nOptimization: 1\nOPTIMUM FOUND\n";
        match parse_models(out) {
            Some(RawResult::Satisfiable(models)) => assert_eq!(models[0], vec!["ans(b)"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn model_answer_picks_designated_atom() {
        let atoms = vec!["holds(1,2)".to_string(), "ans(yes)".to_string()];
        assert_eq!(model_answer(&atoms, "ans"), Some("yes".to_string()));
        assert_eq!(model_answer(&atoms, "out"), None);
        // arity mismatch is not an answer
        assert_eq!(model_answer(&["ans(1,2)".to_string()], "ans"), None);
    }

    #[test]
    fn check_answer_normalizes() {
        let outcome = SolverOutcome {
            kind: OutcomeKind::Answered,
            message: None,
            answers: vec!["\"Yes\"".to_string()],
            elapsed_ms: 1,
        };
        assert!(check_answer(&outcome, "yes"));
        assert!(!check_answer(&outcome, "no"));
        let none = SolverOutcome {
            kind: OutcomeKind::NoAnswerSet,
            message: None,
            answers: vec![],
            elapsed_ms: 1,
        };
        assert!(!check_answer(&none, "yes"));
    }

    #[test]
    fn numeric_answers_compare() {
        let outcome = SolverOutcome {
            kind: OutcomeKind::Answered,
            message: None,
            answers: vec!["2".to_string()],
            elapsed_ms: 0,
        };
        assert!(check_answer(&outcome, "2"));
    }

    #[test]
    fn missing_executable_reported() {
        let cfg = SolverConfig::new("/nonexistent/solver-binary");
        match solve_text("a.", &cfg) {
            Err(SolverError::ExecutableNotFound { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
