//! The rule-distillation loop: preprompt construction, per-example and
//! batched prompting, solver-driven syntax/semantic checks with bounded
//! mending, regression testing over previously seen examples, and the
//! session driver that ties them together.

use serde::{Deserialize, Serialize};

use crate::asp::{parse_program, Program};
use crate::dataset::Example;
use crate::llm::{extract_rules, Backend, LlmError, Transcript};
use crate::logging::RunLogger;
use crate::solver::{check_answer, solve, OutcomeKind, SolverConfig, SolverError, SolverOutcome};

#[derive(Debug, thiserror::Error)]
pub enum DistillError {
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("run log: {0}")]
    Log(#[from] std::io::Error),
}

/// Knobs of the distillation algorithm. `retries` is the per-example retry
/// count r, `mend_retries` the per-check mend budget m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillParams {
    pub retries: usize,
    pub mend_retries: usize,
    pub mending_enabled: bool,
    pub batch_size: usize,
    pub no_facts_guard: bool,
}

impl Default for DistillParams {
    fn default() -> Self {
        DistillParams {
            retries: 1,
            mend_retries: 1,
            mending_enabled: true,
            batch_size: 1,
            no_facts_guard: true,
        }
    }
}

impl DistillParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.retries < 1 {
            return Err("retries (r) must be at least 1".into());
        }
        if self.batch_size < 1 {
            return Err("batch size (b) must be at least 1".into());
        }
        Ok(())
    }

    /// Upper bound on LLM calls for one example/batch: r * (1 + 2m) with
    /// mending on, r without.
    pub fn call_budget(&self) -> u64 {
        let per_attempt = if self.mending_enabled { 1 + 2 * self.mend_retries as u64 } else { 1 };
        self.retries as u64 * per_attempt
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionStats {
    pub llm_calls: u64,
    pub mends_syntax: u64,
    pub mends_semantic: u64,
    pub regressions_failed: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub already_correct: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistillKind {
    Accepted,
    RejectedRegression,
    RejectedSemantic,
    RejectedSyntax,
    AlreadyCorrect,
}

/// Result of distilling one example or batch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistillOutcome {
    pub kind: DistillKind,
    pub example_ids: Vec<String>,
    /// Rules newly committed to the theory; nonempty exactly for `Accepted`.
    pub added_rules: Vec<String>,
    pub detail: String,
    pub llm_calls: u64,
    pub mends_syntax: u64,
    pub mends_semantic: u64,
}

/// Conversation state plus the evolving theory.
#[derive(Debug)]
pub struct SessionState {
    pub theory: Program,
    pub seen: Vec<Example>,
    pub transcript: Transcript,
    pub params: DistillParams,
    pub stats: SessionStats,
}

/// Free-text configuration of the preprompt's worked examples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskConfig {
    pub domain_description: String,
    pub scene_excerpt: String,
    pub question_excerpt: String,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            domain_description: "answering questions about scenes of simple colored 3D objects"
                .to_string(),
            scene_excerpt: "has_shape(0,cube). has_color(0,red). has_size(0,large). \
                            has_material(0,metal).\nhas_shape(1,sphere). has_color(1,blue). \
                            has_size(1,small). has_material(1,rubber).\nleft_of(0,1). \
                            same_obj(0,0). same_obj(1,1). succ(0,1). succ(1,2). num_objects(2)."
                .to_string(),
            question_excerpt: "scene(0). filter_red(1,0). exist(2,1). end(2).".to_string(),
        }
    }
}

/// Build the six-part system preprompt: Introduction, Language Syntax,
/// Scene and Question Explanation, Answer Format, Initial Theory (verbatim),
/// Task Explanation with the response guidelines.
pub fn build_preprompt(init: &Program, task: &TaskConfig) -> String {
    let init_block = if init.is_empty() {
        "The initial theory is empty.".to_string()
    } else {
        init.to_text().trim_end().to_string()
    };
    format!(
        "## Introduction\n\
         You are assisting a visual question answering system for {domain}. \
         The scene and the question have already been parsed into correct symbolic \
         representations; your only concern is the reasoning theory that connects them.\n\
         \n\
         ## Language Syntax\n\
         The representation language is Answer Set Programming (ASP). A rule has the form \
         `head :- body_1, ..., body_n.` where each body element is an atom or a negated atom \
         `not a`. A rule without a body is a fact (`p(1).`), a rule without a head \
         (`:- body.`) is a constraint. Statements end with a period. Variables start with an \
         uppercase letter, constants with a lowercase letter or a digit.\n\
         \n\
         ## Scene and Question Explanation\n\
         Scenes are encoded as ground facts about objects, identified by integer ids. \
         Example scene encoding:\n\
         {scene}\n\
         Questions are encoded as an execution tree of reasoning operations, where the first \
         argument of each operation is its output step and the remaining arguments are input \
         steps. `scene(0).` starts the tree and `end(T).` marks the final step. Example \
         question encoding:\n\
         {question}\n\
         \n\
         ## Answer Format\n\
         The theory must derive exactly one atom `ans(V)` for the final step, where `V` is \
         the answer value (for example `ans(yes)`, `ans(2)`, or `ans(red)`).\n\
         \n\
         ## Initial Theory\n\
         {init}\n\
         \n\
         ## Task Explanation\n\
         Your task is to keep the ASP theory updated with rules that allows us to answer \
         questions.\n\
         We provide an initial theory that can handle some instances.\n\
         The prompt input will consist of one or more questions in the ASP representation.\n\
         \n\
         Strictly follow these guidelines:\n\
         1. Only output the new ASP Rules.\n\
         2. Do not add facts as rules.\n\
         3. New rules should be as general as possible, i.e., have a low number of constants \
         and high number of variables.\n\
         4. Do not output any natural language.\n",
        domain = task.domain_description,
        scene = task.scene_excerpt,
        question = task.question_excerpt,
        init = init_block,
    )
}

/// Render one (question, scene, answer) tuple as a prompt.
pub fn render_example_prompt(ex: &Example) -> String {
    format!(
        "% Example {id}\n% Question:\n{q}% Scene:\n{s}% Expected answer: {a}\n",
        id = ex.id,
        q = ex.question.to_text(),
        s = ex.scene.to_text(),
        a = ex.expected_answer,
    )
}

/// Render a batch prompt: question representations and expected answers only,
/// scene encodings deliberately omitted.
pub fn render_batch_prompt(batch: &[Example]) -> String {
    let mut out = format!(
        "% Batch of {} question(s). Scene encodings are omitted; the rules must be \
         general enough to answer every question below.\n",
        batch.len()
    );
    for ex in batch {
        out.push_str(&format!(
            "% Example {id}\n% Question:\n{q}% Expected answer: {a}\n",
            id = ex.id,
            q = ex.question.to_text(),
            a = ex.expected_answer,
        ));
    }
    out
}

fn describe_actual(outcome: &SolverOutcome) -> String {
    match outcome.kind {
        OutcomeKind::Answered => outcome.answers.first().cloned().unwrap_or_default(),
        OutcomeKind::NoAnswerSet => "(no answer derived)".to_string(),
        OutcomeKind::Timeout => "(solver timeout)".to_string(),
        OutcomeKind::SyntaxError => "(syntax error)".to_string(),
    }
}

fn render_syntax_mend(message: &str) -> String {
    format!(
        "The solver reported a syntax error in the proposed rules:\n{message}\n\
         Revise the rules. Only output the corrected ASP rules."
    )
}

fn render_semantic_mend(failures: &[(String, String, String)]) -> String {
    let mut out = String::from("The proposed rules do not derive the expected answers:\n");
    for (id, expected, actual) in failures {
        out.push_str(&format!(
            "Example {id}: expected answer '{expected}', actual answer '{actual}'.\n"
        ));
    }
    out.push_str("Revise the rules. Only output the corrected ASP rules.");
    out
}

/// Re-solve every seen example against `theory`. Solver errors count the
/// example as failing rather than aborting the run.
pub fn regression_test(
    theory: &Program,
    seen: &[Example],
    cfg: &SolverConfig,
) -> (bool, Vec<String>) {
    let mut failing = Vec::new();
    for ex in seen {
        let ok = match solve(theory, &ex.question, &ex.scene, cfg) {
            Ok(outcome) => check_answer(&outcome, &ex.expected_answer),
            Err(_) => false,
        };
        if !ok {
            failing.push(ex.id.clone());
        }
    }
    (failing.is_empty(), failing)
}

/// A distillation session over one conversation.
pub struct Session<'a> {
    pub state: SessionState,
    backend: &'a Backend,
    solver: &'a SolverConfig,
    logger: Option<&'a mut RunLogger>,
}

impl<'a> Session<'a> {
    pub fn new(
        init: Program,
        params: DistillParams,
        task: &TaskConfig,
        session_id: impl Into<String>,
        backend: &'a Backend,
        solver: &'a SolverConfig,
    ) -> Session<'a> {
        let preprompt = build_preprompt(&init, task);
        Session {
            state: SessionState {
                theory: init,
                seen: Vec::new(),
                transcript: Transcript::new(session_id, preprompt),
                params,
                stats: SessionStats::default(),
            },
            backend,
            solver,
            logger: None,
        }
    }

    /// Stream transcript turns and outcomes into a run log as they happen.
    pub fn with_logger(mut self, logger: &'a mut RunLogger) -> Result<Session<'a>, DistillError> {
        logger.sync_transcript(&self.state.transcript)?;
        self.logger = Some(logger);
        Ok(self)
    }

    fn sync_log(&mut self) -> Result<(), DistillError> {
        if let Some(logger) = self.logger.as_deref_mut() {
            logger.sync_transcript(&self.state.transcript)?;
        }
        Ok(())
    }

    fn call_backend(&mut self, prompt: &str, used: &mut u64) -> Result<String, DistillError> {
        let response = self.backend.respond(&mut self.state.transcript, prompt)?;
        self.state.stats.llm_calls += 1;
        *used += 1;
        self.sync_log()?;
        Ok(response)
    }

    fn solve_example(&self, theory: &Program, ex: &Example) -> Result<SolverOutcome, DistillError> {
        Ok(solve(theory, &ex.question, &ex.scene, self.solver)?)
    }

    /// Distill rules for a single example, scene included in the prompt.
    pub fn distill_example(&mut self, ex: &Example) -> Result<DistillOutcome, DistillError> {
        let outcome = self.solve_example(&self.state.theory, ex)?;
        if check_answer(&outcome, &ex.expected_answer) {
            return Ok(self.already_correct(std::slice::from_ref(ex)));
        }
        let prompt = render_example_prompt(ex);
        self.attempt_loop(std::slice::from_ref(ex), prompt)
    }

    /// Distill rules for a batch: one prompt without scenes, semantic check
    /// over every member, all-or-nothing commit.
    pub fn distill_batch(&mut self, batch: &[Example]) -> Result<DistillOutcome, DistillError> {
        assert!(
            !batch.is_empty() && batch.len() <= self.state.params.batch_size,
            "batch size must be within 1..=b"
        );
        let mut all_correct = true;
        for ex in batch {
            let outcome = self.solve_example(&self.state.theory, ex)?;
            if !check_answer(&outcome, &ex.expected_answer) {
                all_correct = false;
                break;
            }
        }
        if all_correct {
            return Ok(self.already_correct(batch));
        }
        let prompt = render_batch_prompt(batch);
        self.attempt_loop(batch, prompt)
    }

    fn already_correct(&mut self, members: &[Example]) -> DistillOutcome {
        self.state.seen.extend(members.iter().cloned());
        self.state.stats.already_correct += 1;
        DistillOutcome {
            kind: DistillKind::AlreadyCorrect,
            example_ids: members.iter().map(|e| e.id.clone()).collect(),
            added_rules: Vec::new(),
            detail: "current theory already answers correctly".to_string(),
            llm_calls: 0,
            mends_syntax: 0,
            mends_semantic: 0,
        }
    }

    /// Up to r attempts of prompt -> extract -> solve -> mend -> regression.
    /// The committed theory changes only on acceptance.
    fn attempt_loop(
        &mut self,
        members: &[Example],
        prompt: String,
    ) -> Result<DistillOutcome, DistillError> {
        let params = self.state.params.clone();
        let ids: Vec<String> = members.iter().map(|e| e.id.clone()).collect();
        let mut calls: u64 = 0;
        let mut mends_syntax: u64 = 0;
        let mut mends_semantic: u64 = 0;
        let mut last_failure = (DistillKind::RejectedSemantic, String::from("no attempt made"));

        for _attempt in 0..params.retries {
            let response = self.call_backend(&prompt, &mut calls)?;
            let mut rules = extract_rules(&response, params.no_facts_guard);
            let mut syntax_budget = params.mend_retries;
            let mut semantic_budget = params.mend_retries;

            loop {
                let candidate = self.state.theory.extended(
                    rules
                        .iter()
                        .map(|text| parse_program(text).expect("extracted statements parse"))
                        .flat_map(|p| p.rules().to_vec()),
                );

                // Solve every member; a syntax error anywhere aborts the pass.
                let mut syntax_error: Option<String> = None;
                let mut failures: Vec<(String, String, String)> = Vec::new();
                for ex in members {
                    let outcome = self.solve_example(&candidate, ex)?;
                    if outcome.kind == OutcomeKind::SyntaxError {
                        syntax_error =
                            Some(outcome.message.unwrap_or_else(|| "syntax error".to_string()));
                        break;
                    }
                    if !check_answer(&outcome, &ex.expected_answer) {
                        failures.push((
                            ex.id.clone(),
                            ex.expected_answer.clone(),
                            describe_actual(&outcome),
                        ));
                    }
                }

                if let Some(message) = syntax_error {
                    if params.mending_enabled && syntax_budget > 0 {
                        syntax_budget -= 1;
                        mends_syntax += 1;
                        self.state.stats.mends_syntax += 1;
                        let mend = render_syntax_mend(&message);
                        let response = self.call_backend(&mend, &mut calls)?;
                        rules = extract_rules(&response, params.no_facts_guard);
                        continue;
                    }
                    last_failure = (DistillKind::RejectedSyntax, message);
                    break;
                }

                if !failures.is_empty() {
                    if params.mending_enabled && semantic_budget > 0 {
                        semantic_budget -= 1;
                        mends_semantic += 1;
                        self.state.stats.mends_semantic += 1;
                        let mend = render_semantic_mend(&failures);
                        let response = self.call_backend(&mend, &mut calls)?;
                        rules = extract_rules(&response, params.no_facts_guard);
                        continue;
                    }
                    let detail = failures
                        .iter()
                        .map(|(id, exp, act)| format!("{id}: expected '{exp}', got '{act}'"))
                        .collect::<Vec<_>>()
                        .join("; ");
                    last_failure = (DistillKind::RejectedSemantic, detail);
                    break;
                }

                // Semantic check passed; make sure nothing previously seen broke.
                let (pass, failing) = regression_test(&candidate, &self.state.seen, self.solver);
                if pass {
                    let added: Vec<String> = candidate
                        .iter()
                        .filter(|r| !self.state.theory.contains_text(r.source_text()))
                        .map(|r| r.source_text().to_string())
                        .collect();
                    self.state.theory = candidate;
                    self.state.seen.extend(members.iter().cloned());
                    self.state.stats.accepted += 1;
                    return Ok(DistillOutcome {
                        kind: DistillKind::Accepted,
                        example_ids: ids,
                        added_rules: added,
                        detail: "extension committed".to_string(),
                        llm_calls: calls,
                        mends_syntax,
                        mends_semantic,
                    });
                }
                self.state.stats.regressions_failed += 1;
                last_failure = (
                    DistillKind::RejectedRegression,
                    format!("extension breaks previously seen examples: {}", failing.join(", ")),
                );
                break;
            }
        }

        self.state.stats.rejected += 1;
        Ok(DistillOutcome {
            kind: last_failure.0,
            example_ids: ids,
            added_rules: Vec::new(),
            detail: last_failure.1,
            llm_calls: calls,
            mends_syntax,
            mends_semantic,
        })
    }
}

/// Everything a full session needs besides the examples.
pub struct SessionSetup<'a> {
    pub init: Program,
    pub params: DistillParams,
    pub task: TaskConfig,
    pub session_id: String,
    pub backend: &'a Backend,
    pub solver: &'a SolverConfig,
}

#[derive(Debug)]
pub struct SessionResult {
    pub theory: Program,
    pub outcomes: Vec<DistillOutcome>,
    pub transcript: Transcript,
    pub stats: SessionStats,
    /// Set when the session aborted on an unrecoverable backend/solver error;
    /// the fields above hold the progress made until then.
    pub error: Option<String>,
}

/// Run a whole session: preprompt as the system turn, then the examples in
/// consecutive batches of `params.batch_size`.
pub fn run_session(
    setup: SessionSetup<'_>,
    examples: &[Example],
    mut logger: Option<&mut RunLogger>,
) -> SessionResult {
    let batch_size = setup.params.batch_size;
    let mut session = Session::new(
        setup.init,
        setup.params,
        &setup.task,
        setup.session_id,
        setup.backend,
        setup.solver,
    );
    if let Some(l) = logger.as_deref_mut() {
        match session.with_logger(l) {
            Ok(s) => session = s,
            Err(e) => {
                return SessionResult {
                    theory: Program::empty(),
                    outcomes: Vec::new(),
                    transcript: Transcript::new("failed", "unlogged"),
                    stats: SessionStats::default(),
                    error: Some(e.to_string()),
                }
            }
        }
    }

    let mut outcomes = Vec::new();
    let mut error = None;
    for batch in examples.chunks(batch_size) {
        match session.distill_batch(batch) {
            Ok(outcome) => {
                if let Some(l) = session.logger.as_deref_mut() {
                    if let Err(e) = l.log_outcome(&outcome) {
                        error = Some(e.to_string());
                        outcomes.push(outcome);
                        break;
                    }
                }
                outcomes.push(outcome);
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    if let Some(l) = session.logger.as_deref_mut() {
        if let Err(e) = l.write_final_theory(&session.state.theory) {
            error.get_or_insert(e.to_string());
        }
    }
    SessionResult {
        theory: session.state.theory,
        outcomes,
        transcript: session.state.transcript,
        stats: session.state.stats,
        error,
    }
}
