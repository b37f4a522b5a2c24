//! Integration tests of the distillation loop against the bundled solver and
//! deterministic backends: restoration, mending, regression rollback, and the
//! call-budget bound.

use asp_distill::asp::{remove_rules_mentioning, Program};
use asp_distill::dataset::Example;
use asp_distill::distill::{
    run_session, DistillKind, DistillParams, Session, SessionSetup, TaskConfig,
};
use asp_distill::fixture;
use asp_distill::llm::{Backend, OracleFault, Role};
use asp_distill::solver::SolverConfig;

fn test_config() -> SolverConfig {
    SolverConfig::new(env!("CARGO_BIN_EXE_tinyasp"))
}

fn broken_theory_and_removed() -> (Program, Program) {
    let full = fixture::full_theory();
    let broken = remove_rules_mentioning(&full, "exist");
    let removed = Program::new(
        full.iter().filter(|r| !broken.contains_text(r.source_text())).cloned(),
        None,
    );
    (broken, removed)
}

/// First corpus example that needs the exist rules, plus one that does not.
fn pick_examples() -> (Example, Example) {
    let corpus = fixture::examples_only(fixture::generate_corpus("t", 20, 21));
    let exist = corpus.iter().find(|e| e.mentions("exist")).cloned().expect("exist example");
    let other = corpus.iter().find(|e| !e.mentions("exist")).cloned().expect("other example");
    (exist, other)
}

#[test]
fn oracle_restores_a_broken_example() {
    let (broken, removed) = broken_theory_and_removed();
    let (exist_ex, _) = pick_examples();
    let backend = Backend::oracle(removed);
    let cfg = test_config();
    let mut session = Session::new(
        broken.clone(),
        DistillParams::default(),
        &TaskConfig::default(),
        "restore",
        &backend,
        &cfg,
    );
    let outcome = session.distill_example(&exist_ex).unwrap();
    assert_eq!(outcome.kind, DistillKind::Accepted);
    assert!(!outcome.added_rules.is_empty());
    assert!(session.state.theory.len() > broken.len());
    assert_eq!(session.state.seen.len(), 1);
    // the committed theory must answer the example
    let check = asp_distill::solver::solve(
        &session.state.theory,
        &exist_ex.question,
        &exist_ex.scene,
        &cfg,
    )
    .unwrap();
    assert!(asp_distill::solver::check_answer(&check, &exist_ex.expected_answer));
}

#[test]
fn already_correct_short_circuits_without_llm_calls() {
    let full = fixture::full_theory();
    let (exist_ex, other_ex) = pick_examples();
    let backend = Backend::scripted(vec![]); // would error if ever called
    let cfg = test_config();
    let mut session = Session::new(
        full,
        DistillParams::default(),
        &TaskConfig::default(),
        "noop",
        &backend,
        &cfg,
    );
    for ex in [&exist_ex, &other_ex] {
        let outcome = session.distill_example(ex).unwrap();
        assert_eq!(outcome.kind, DistillKind::AlreadyCorrect);
        assert_eq!(outcome.llm_calls, 0);
    }
    assert_eq!(session.state.stats.llm_calls, 0);
    assert_eq!(session.state.seen.len(), 2);
}

#[test]
fn syntax_fault_is_mended_once() {
    let (broken, removed) = broken_theory_and_removed();
    let (exist_ex, _) = pick_examples();
    let backend = Backend::oracle_with_fault(removed, OracleFault::SyntaxThenCorrect);
    let cfg = test_config();
    let mut session = Session::new(
        broken,
        DistillParams::default(),
        &TaskConfig::default(),
        "mend-syntax",
        &backend,
        &cfg,
    );
    let outcome = session.distill_example(&exist_ex).unwrap();
    assert_eq!(outcome.kind, DistillKind::Accepted);
    assert_eq!(outcome.mends_syntax, 1);
    assert_eq!(session.state.stats.mends_syntax, 1);
    assert_eq!(outcome.llm_calls, 2);
    // transcript: system, user(example), assistant(faulty), user(mend), assistant(fixed)
    let roles: Vec<Role> = session.state.transcript.turns().iter().map(|t| t.role).collect();
    assert_eq!(roles, vec![Role::System, Role::User, Role::Assistant, Role::User, Role::Assistant]);
    let mend_turn = &session.state.transcript.turns()[3];
    assert!(mend_turn.content.contains("syntax error"), "{}", mend_turn.content);
}

#[test]
fn syntax_fault_without_mending_rejects_and_rolls_back() {
    let (broken, removed) = broken_theory_and_removed();
    let (exist_ex, _) = pick_examples();
    let backend = Backend::oracle_with_fault(removed, OracleFault::SyntaxThenCorrect);
    let cfg = test_config();
    let params = DistillParams { mending_enabled: false, ..DistillParams::default() };
    let mut session = Session::new(
        broken.clone(),
        params,
        &TaskConfig::default(),
        "no-mend",
        &backend,
        &cfg,
    );
    let outcome = session.distill_example(&exist_ex).unwrap();
    assert_eq!(outcome.kind, DistillKind::RejectedSyntax);
    assert!(outcome.added_rules.is_empty());
    assert_eq!(session.state.theory.to_text(), broken.to_text(), "theory must be untouched");
    assert!(session.state.seen.is_empty());
}

#[test]
fn wrong_answer_fault_is_mended_with_both_answer_strings() {
    let (broken, removed) = broken_theory_and_removed();
    let (exist_ex, _) = pick_examples();
    let backend = Backend::oracle_with_fault(removed, OracleFault::WrongAnswerThenCorrect);
    let cfg = test_config();
    let mut session = Session::new(
        broken,
        DistillParams::default(),
        &TaskConfig::default(),
        "mend-semantic",
        &backend,
        &cfg,
    );
    let outcome = session.distill_example(&exist_ex).unwrap();
    assert_eq!(outcome.kind, DistillKind::Accepted, "{}", outcome.detail);
    assert_eq!(outcome.mends_semantic, 1);
    let mend_turn = &session.state.transcript.turns()[3];
    assert!(mend_turn.content.contains("faulty"), "actual answer present: {}", mend_turn.content);
    assert!(
        mend_turn.content.contains(&exist_ex.expected_answer),
        "expected answer present: {}",
        mend_turn.content
    );
}

#[test]
fn over_general_rule_is_rejected_by_regression() {
    let (broken, removed) = broken_theory_and_removed();
    let corpus = fixture::examples_only(fixture::generate_corpus("t", 20, 21));
    // e1: answerable by the broken theory (no exist); e2: a no-answer exist question.
    let e1 = corpus.iter().find(|e| !e.mentions("exist")).cloned().unwrap();
    let e2 = corpus
        .iter()
        .find(|e| e.mentions("exist") && e.expected_answer == "no")
        .cloned()
        .expect("an exist question with answer no");
    // The adversarial extension answers e2 but vetoes e1's answer outright.
    let adversarial = format!(
        "{}\n:- ans({}).",
        removed.iter().map(|r| r.source_text().to_string()).collect::<Vec<_>>().join("\n"),
        e1.expected_answer,
    );
    let backend = Backend::scripted(vec![adversarial]);
    let cfg = test_config();
    let mut session = Session::new(
        broken.clone(),
        DistillParams::default(),
        &TaskConfig::default(),
        "regression",
        &backend,
        &cfg,
    );

    let first = session.distill_example(&e1).unwrap();
    assert_eq!(first.kind, DistillKind::AlreadyCorrect);
    let before = session.state.theory.to_text();

    let second = session.distill_example(&e2).unwrap();
    assert_eq!(second.kind, DistillKind::RejectedRegression, "{}", second.detail);
    assert!(second.detail.contains(&e1.id), "failing id is reported: {}", second.detail);
    assert_eq!(session.state.theory.to_text(), before, "rejection leaves theory byte-identical");
    assert_eq!(session.state.stats.regressions_failed, 1);
    assert_eq!(session.state.seen.len(), 1, "rejected example is not added to seen");
}

#[test]
fn call_budget_is_respected() {
    let (broken, _) = broken_theory_and_removed();
    let (exist_ex, _) = pick_examples();
    // A backend that always produces a syntactically broken extension forces
    // the full mend budget to be spent on every attempt.
    let bad = "#broken holds(T,O) :- scene(T).".to_string();
    let params = DistillParams { retries: 3, mend_retries: 2, ..DistillParams::default() };
    let responses = vec![bad; 100];
    let backend = Backend::scripted(responses);
    let cfg = test_config();
    let mut session =
        Session::new(broken, params.clone(), &TaskConfig::default(), "budget", &backend, &cfg);
    let outcome = session.distill_example(&exist_ex).unwrap();
    assert_eq!(outcome.kind, DistillKind::RejectedSyntax);
    // r attempts, each 1 prompt + at most m syntax mends (semantic never reached)
    assert_eq!(outcome.llm_calls, 9);
    assert!(outcome.llm_calls <= params.call_budget());
}

#[test]
fn run_session_processes_batches_in_order() {
    let (broken, removed) = broken_theory_and_removed();
    let corpus = fixture::examples_only(fixture::generate_corpus("t", 20, 31));
    let backend = Backend::oracle(removed);
    let cfg = test_config();
    let params = DistillParams { batch_size: 5, ..DistillParams::default() };
    let result = run_session(
        SessionSetup {
            init: broken,
            params,
            task: TaskConfig::default(),
            session_id: "batched".into(),
            backend: &backend,
            solver: &cfg,
        },
        &corpus,
        None,
    );
    assert!(result.error.is_none(), "{:?}", result.error);
    assert_eq!(result.outcomes.len(), 4, "20 examples in batches of 5");
    // After the first accepted batch the theory is whole again.
    let accepted: Vec<_> =
        result.outcomes.iter().filter(|o| o.kind == DistillKind::Accepted).collect();
    assert_eq!(accepted.len(), 1);
    assert_eq!(result.outcomes[0].kind, DistillKind::Accepted);
    for o in &result.outcomes[1..] {
        assert_eq!(o.kind, DistillKind::AlreadyCorrect);
    }
    // Batch prompts never leak scene facts.
    for turn in result.transcript.turns() {
        if turn.role == Role::User {
            assert!(!turn.content.contains("has_shape"), "scene atom leaked into batch prompt");
        }
    }
}

#[test]
fn session_with_all_correct_examples_never_calls_backend() {
    let full = fixture::full_theory();
    let corpus = fixture::examples_only(fixture::generate_corpus("t", 10, 41));
    let backend = Backend::scripted(vec![]);
    let cfg = test_config();
    let result = run_session(
        SessionSetup {
            init: full.clone(),
            params: DistillParams::default(),
            task: TaskConfig::default(),
            session_id: "all-correct".into(),
            backend: &backend,
            solver: &cfg,
        },
        &corpus,
        None,
    );
    assert!(result.error.is_none());
    assert_eq!(result.stats.llm_calls, 0);
    assert!(result.outcomes.iter().all(|o| o.kind == DistillKind::AlreadyCorrect));
    assert_eq!(result.theory.to_text(), full.to_text());
}

#[test]
fn null_backend_changes_nothing() {
    let (broken, _) = broken_theory_and_removed();
    let corpus = fixture::examples_only(fixture::generate_corpus("t", 10, 51));
    let backend = Backend::null();
    let cfg = test_config();
    let result = run_session(
        SessionSetup {
            init: broken.clone(),
            params: DistillParams::default(),
            task: TaskConfig::default(),
            session_id: "null".into(),
            backend: &backend,
            solver: &cfg,
        },
        &corpus,
        None,
    );
    assert!(result.error.is_none());
    assert_eq!(result.theory.to_text(), broken.to_text());
    assert_eq!(result.stats.accepted, 0);
}
