//! The three experiment designs (predicate removal, random removal, tiered
//! batch distillation) with repeated seeded runs, accuracy evaluation over a
//! held-out suite, and the mean±std (min, max) aggregate statistics.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::asp::{remove_random_fraction, remove_rules_mentioning, Program};
use crate::dataset::{sample, DatasetError, Example, SampleSpec};
use crate::distill::{run_session, DistillParams, SessionSetup, SessionStats, TaskConfig};
use crate::llm::{Backend, HttpConfig, OracleFault};
use crate::logging::RunLogger;
use crate::solver::{check_answer, solve, SolverConfig};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("run log: {0}")]
    Log(#[from] std::io::Error),
    #[error("experiment setup: {0}")]
    Setup(String),
}

/// How to build the per-run backend. Oracle variants are seeded with the
/// rules the mutation removed (`hidden`), which deterministic tests rely on.
#[derive(Clone, Debug)]
pub enum BackendSpec {
    Oracle,
    OracleFault(OracleFault),
    /// An oracle with nothing to offer; models the no-improvement baseline.
    Null,
    Scripted(Vec<String>),
    Http(HttpConfig),
}

impl BackendSpec {
    pub fn build(&self, hidden: &Program) -> Backend {
        match self {
            BackendSpec::Oracle => Backend::oracle(hidden.clone()),
            BackendSpec::OracleFault(fault) => Backend::oracle_with_fault(hidden.clone(), *fault),
            BackendSpec::Null => Backend::null(),
            BackendSpec::Scripted(responses) => Backend::scripted(responses.clone()),
            BackendSpec::Http(cfg) => Backend::http(cfg.clone()),
        }
    }
}

/// Common experiment knobs; `seeds` has one entry per run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub params: DistillParams,
    pub k: usize,
    pub jobs: usize,
    #[serde(skip)]
    pub log_root: Option<PathBuf>,
}

impl ExperimentConfig {
    fn base(k: usize, params: DistillParams) -> ExperimentConfig {
        ExperimentConfig {
            runs: 5,
            seeds: (1..=5).map(|i| 100 + i).collect(),
            params,
            k,
            jobs: 1,
            log_root: None,
        }
    }

    /// Experiment 1 defaults: relevance sampling k=10, r=m=1.
    pub fn predicate_removal_defaults() -> ExperimentConfig {
        ExperimentConfig::base(10, DistillParams::default())
    }

    /// Experiment 2 defaults: count sampling k=2, r=1.
    pub fn random_removal_defaults() -> ExperimentConfig {
        ExperimentConfig::base(2, DistillParams::default())
    }

    /// Experiment 3 defaults: count sampling k=11, r=3, m=2, batch size b.
    pub fn tiered_defaults(batch_size: usize) -> ExperimentConfig {
        let params = DistillParams {
            retries: 3,
            mend_retries: 2,
            batch_size,
            ..DistillParams::default()
        };
        ExperimentConfig::base(11, params)
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> ExperimentConfig {
        self.runs = seeds.len();
        self.seeds = seeds;
        self
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.seeds.len() != self.runs {
            return Err(ExperimentError::Setup(format!(
                "need one seed per run: {} seeds for {} runs",
                self.seeds.len(),
                self.runs
            )));
        }
        if self.runs == 0 {
            return Err(ExperimentError::Setup("at least one run required".into()));
        }
        self.params.validate().map_err(ExperimentError::Setup)
    }
}

/// Percentage of `suite` answered correctly by `theory`. Solver errors count
/// as incorrect. Full precision; rounding is display-only.
pub fn evaluate_accuracy(
    theory: &Program,
    suite: &[Example],
    cfg: &SolverConfig,
    jobs: usize,
) -> f64 {
    assert!(!suite.is_empty(), "accuracy over an empty suite is undefined");
    let correct = |ex: &Example| -> bool {
        match solve(theory, &ex.question, &ex.scene, cfg) {
            Ok(outcome) => check_answer(&outcome, &ex.expected_answer),
            Err(_) => false,
        }
    };
    let hits: usize = if jobs <= 1 || suite.len() < 2 {
        suite.iter().filter(|e| correct(e)).count()
    } else {
        let chunk = suite.len().div_ceil(jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = suite
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().filter(|e| correct(e)).count()))
                .collect();
            handles.into_iter().map(|h| h.join().expect("evaluation thread")).sum()
        })
    };
    100.0 * hits as f64 / suite.len() as f64
}

/// Population statistics over the per-run final accuracies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Aggregate {
        assert!(!values.is_empty(), "aggregate of no runs");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Aggregate { mean, std: var.sqrt(), min, max }
    }

    /// Table-cell rendering: `MM.MM±SS.SS (min, max)`.
    pub fn format_cell(&self) -> String {
        format!("{:.2}±{:05.2} ({:.2}, {:.2})", self.mean, self.std, self.min, self.max)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// Accuracy of the mutated theory this run started from.
    pub init_accuracy: f64,
    pub final_accuracy: f64,
    pub stats: SessionStats,
    pub session_error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub target: String,
    /// Accuracy of the untouched full theory on the test suite.
    pub baseline: f64,
    /// Accuracy of the mutated theory before distillation (mean over runs
    /// when the mutation is seeded per run).
    pub mutated_baseline: f64,
    pub per_run: Vec<RunRecord>,
    pub aggregate: Aggregate,
    /// Population standard deviation is reported.
    pub std_kind: String,
}

impl ExperimentReport {
    fn assemble(
        kind: &str,
        target: &str,
        baseline: f64,
        per_run: Vec<RunRecord>,
    ) -> ExperimentReport {
        let finals: Vec<f64> = per_run.iter().map(|r| r.final_accuracy).collect();
        let inits: Vec<f64> = per_run.iter().map(|r| r.init_accuracy).collect();
        ExperimentReport {
            kind: kind.to_string(),
            target: target.to_string(),
            baseline,
            mutated_baseline: Aggregate::of(&inits).mean,
            aggregate: Aggregate::of(&finals),
            per_run,
            std_kind: "population".to_string(),
        }
    }

    /// Rendered text table in the `MM.MM±SS.SS (min, max)` layout.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("experiment      : {} ({})\n", self.kind, self.target));
        out.push_str(&format!("baseline        : {:.2}\n", self.baseline));
        out.push_str(&format!("mutated baseline: {:.2}\n", self.mutated_baseline));
        out.push_str("run  seed        init     final\n");
        for r in &self.per_run {
            out.push_str(&format!(
                "{:>3}  {:<10} {:>7.2}  {:>7.2}{}\n",
                r.run,
                r.seed,
                r.init_accuracy,
                r.final_accuracy,
                if r.session_error.is_some() { "  (run failed)" } else { "" },
            ));
        }
        out.push_str(&format!("aggregate (population std): {}\n", self.aggregate.format_cell()));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

struct RunPlan<'a> {
    kind: &'a str,
    target: String,
    full: &'a Program,
    test: &'a [Example],
    backend: &'a BackendSpec,
    solver: &'a SolverConfig,
    cfg: &'a ExperimentConfig,
}

/// Shared run loop: mutate per seed, sample, distill, evaluate.
fn drive<'a>(
    plan: RunPlan<'a>,
    mut mutate: impl FnMut(u64) -> (Program, Program, SampleSpec),
    train: &[Example],
) -> Result<ExperimentReport, ExperimentError> {
    plan.cfg.validate()?;
    let baseline = evaluate_accuracy(plan.full, plan.test, plan.solver, plan.cfg.jobs);
    let mut per_run = Vec::with_capacity(plan.cfg.runs);
    for (run, &seed) in plan.cfg.seeds.iter().enumerate() {
        let (init, hidden, sample_spec) = mutate(seed);
        let init_accuracy = evaluate_accuracy(&init, plan.test, plan.solver, plan.cfg.jobs);
        let examples = sample(train, &sample_spec)?;
        let backend = plan.backend.build(&hidden);
        let session_id = format!("{}-{}-run{run}-seed{seed}", plan.kind, plan.target);

        let mut logger = match &plan.cfg.log_root {
            Some(root) => {
                let logger = RunLogger::create(root.join(format!("run-{run}")))?;
                logger.write_params(&serde_json::json!({
                    "experiment": plan.kind,
                    "target": plan.target,
                    "run": run,
                    "seed": seed,
                    "params": plan.cfg.params,
                    "sample": sample_spec,
                    "backend": backend.kind_name(),
                    "solver": plan.solver,
                    "example_ids": examples.iter().map(|e| e.id.clone()).collect::<Vec<_>>(),
                }))?;
                Some(logger)
            }
            None => None,
        };

        let result = run_session(
            SessionSetup {
                init,
                params: plan.cfg.params.clone(),
                task: TaskConfig::default(),
                session_id,
                backend: &backend,
                solver: plan.solver,
            },
            &examples,
            logger.as_mut(),
        );
        let final_accuracy = evaluate_accuracy(&result.theory, plan.test, plan.solver, plan.cfg.jobs);
        per_run.push(RunRecord {
            run,
            seed,
            init_accuracy,
            final_accuracy,
            stats: result.stats,
            session_error: result.error,
        });
    }
    let report = ExperimentReport::assemble(plan.kind, &plan.target, baseline, per_run);
    if let Some(root) = &plan.cfg.log_root {
        RunLogger::write_report(root, &report.to_json(), &report.render_table())?;
    }
    Ok(report)
}

/// Experiment 1: remove every rule mentioning `predicate`, then distill with
/// examples that contain it (relevance sampling, restricted to the predicate).
pub fn run_predicate_removal(
    full: &Program,
    predicate: &str,
    train: &[Example],
    test: &[Example],
    backend: &BackendSpec,
    solver: &SolverConfig,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let mutated = remove_rules_mentioning(full, predicate);
    if mutated.len() == full.len() {
        return Err(ExperimentError::Setup(format!(
            "predicate '{predicate}' does not occur in the theory"
        )));
    }
    let hidden = Program::new(
        full.iter().filter(|r| !mutated.contains_text(r.source_text())).cloned(),
        Some("removed".to_string()),
    );
    drive(
        RunPlan {
            kind: "predicate-removal",
            target: predicate.to_string(),
            full,
            test,
            backend,
            solver,
            cfg,
        },
        |seed| (mutated.clone(), hidden.clone(), SampleSpec::relevance(predicate, cfg.k, seed)),
        train,
    )
}

/// Experiment 2: remove a seeded random `percent` of the rules, then distill
/// with count-strategy samples. The oracle is seeded with the full theory
/// (restoring a superset is fine; duplicates are dropped on concatenation).
pub fn run_random_removal(
    full: &Program,
    percent: u32,
    train: &[Example],
    test: &[Example],
    backend: &BackendSpec,
    solver: &SolverConfig,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    if percent == 0 || percent >= 100 {
        return Err(ExperimentError::Setup("percent must be within 1..=99".into()));
    }
    drive(
        RunPlan {
            kind: "random-removal",
            target: format!("s={percent}"),
            full,
            test,
            backend,
            solver,
            cfg,
        },
        |seed| {
            let mutated = remove_random_fraction(full, percent, seed);
            (mutated, full.clone(), SampleSpec::count(cfg.k, seed))
        },
        train,
    )
}

/// Experiment 3: start from a hand-selected tier of the full theory and
/// distill in batches of `cfg.params.batch_size`.
pub fn run_tiered_batch(
    full: &Program,
    tier: &Program,
    train: &[Example],
    test: &[Example],
    backend: &BackendSpec,
    solver: &SolverConfig,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    for rule in tier.iter() {
        if !full.contains_text(rule.source_text()) {
            return Err(ExperimentError::Setup(format!(
                "tier rule not present in the full theory: {}",
                rule.source_text()
            )));
        }
    }
    let hidden = Program::new(
        full.iter().filter(|r| !tier.contains_text(r.source_text())).cloned(),
        Some("removed".to_string()),
    );
    let tier_name = tier.label.clone().unwrap_or_else(|| "tier".to_string());
    drive(
        RunPlan {
            kind: "tiered-batch",
            target: format!("{tier_name} b={}", cfg.params.batch_size),
            full,
            test,
            backend,
            solver,
            cfg,
        },
        |seed| (tier.clone(), hidden.clone(), SampleSpec::count(cfg.k, seed)),
        train,
    )
}
