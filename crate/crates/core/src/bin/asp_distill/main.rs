//! Command-line entry point: corpus validation and sampling, theory
//! mutation, distillation runs, the three experiment designs, transcript
//! replay, solver cross-validation, and fixture generation.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use asp_distill::asp::{parse_program, remove_random_fraction, remove_rules_mentioning, Program};
use asp_distill::config::AppConfig;
use asp_distill::dataset::{load_corpus, sample, Example, SampleSpec, SampleStrategy};
use asp_distill::distill::{run_session, DistillParams, SessionSetup, TaskConfig};
use asp_distill::experiment::{
    run_predicate_removal, run_random_removal, run_tiered_batch, BackendSpec, ExperimentConfig,
    ExperimentReport,
};
use asp_distill::fixture;
use asp_distill::llm::{Backend, OracleFault, Transcript};
use asp_distill::logging::RunLogger;
use asp_distill::solver::{oracle_check, SolverConfig};

#[derive(Parser)]
#[command(
    name = "asp-distill",
    version,
    about = "Distill ASP rules for question answering from an LLM backend, with solver-checked \
             mending, regression testing, and reproducible experiments"
)]
struct Cli {
    /// Config file (sectioned key = value format)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Solver executable override
    #[arg(long, global = true)]
    solver: Option<PathBuf>,
    /// Parallel solver fan-out for evaluation
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus inspection
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Theory mutation
    #[command(subcommand)]
    Theory(TheoryCmd),
    /// Run one distillation session over a corpus
    Run(RunArgs),
    /// The experiment designs with repeated seeded runs
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Re-run a logged session from its transcript and verify the outcome
    Replay(ReplayArgs),
    /// Cross-validate the external solver against the built-in checker
    OracleCheck(OracleCheckArgs),
    /// Generate the bundled fixture theory and corpora
    #[command(subcommand)]
    Fixture(FixtureCmd),
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Parse a corpus file and report its size
    Validate {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Draw a sample and print the selected example ids
    Sample {
        path: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Restrict predicate-relevance sampling to this predicate
        #[arg(long)]
        pred: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Count,
    Relevance,
}

#[derive(Subcommand)]
enum TheoryCmd {
    /// Remove rules from a theory file
    Mutate {
        theory: PathBuf,
        /// Remove all rules mentioning this predicate
        #[arg(long, conflicts_with = "remove_frac")]
        remove_pred: Option<String>,
        /// Remove this percentage of rules at random
        #[arg(long)]
        remove_frac: Option<u32>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Http,
    Oracle,
    Null,
    Scripted,
    Replay,
    OracleSyntaxFault,
    OracleWrongFault,
}

#[derive(Args)]
struct RunArgs {
    /// Initial theory file
    #[arg(long)]
    init: PathBuf,
    /// Corpus of (question, scene, answer) records
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    backend: BackendArg,
    /// Rules file backing the oracle backend
    #[arg(long)]
    oracle_rules: Option<PathBuf>,
    /// JSONL file of scripted responses (one JSON string per line)
    #[arg(long)]
    script: Option<PathBuf>,
    /// transcript.jsonl of a previous run, for the replay backend
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Example retries r
    #[arg(long)]
    r: Option<usize>,
    /// Mend retries m
    #[arg(long)]
    m: Option<usize>,
    /// Batch size b
    #[arg(long)]
    batch: Option<usize>,
    /// Disable the mending loop
    #[arg(long)]
    no_mend: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Optional sampling before the run (whole corpus in order otherwise)
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    pred: Option<String>,
    #[arg(long)]
    log_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct ExperimentCommonArgs {
    /// Full theory file (bundled fixture theory when omitted)
    #[arg(long)]
    theory: Option<PathBuf>,
    /// Training corpus (bundled fixture corpus when omitted)
    #[arg(long)]
    train: Option<PathBuf>,
    /// Held-out test corpus (bundled fixture corpus when omitted)
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "oracle")]
    backend: BackendArg,
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    /// Comma-separated seeds, one per run
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    no_mend: bool,
    #[arg(long)]
    log_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Remove all rules mentioning a predicate, then restore by distillation
    PredicateRemoval {
        #[arg(long)]
        pred: String,
        #[command(flatten)]
        common: ExperimentCommonArgs,
    },
    /// Remove a random percentage of rules, then restore by distillation
    RandomRemoval {
        /// Percentage of rules to remove (1..=99)
        #[arg(long)]
        s: u32,
        #[command(flatten)]
        common: ExperimentCommonArgs,
    },
    /// Distill from a hand-selected initial tier with batched prompts
    Tiered {
        #[arg(long)]
        tier: String,
        /// Batch size b
        #[arg(long, default_value_t = 1)]
        batch: usize,
        /// Tier theory file (bundled fixture tier when omitted)
        #[arg(long)]
        tier_theory: Option<PathBuf>,
        #[command(flatten)]
        common: ExperimentCommonArgs,
    },
}

#[derive(Args)]
struct ReplayArgs {
    /// Log directory of a previous `run` invocation
    #[arg(long)]
    log_dir: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// Number of random programs to cross-validate
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum FixtureCmd {
    /// Write the fixture theory, tiers, and train/test corpora
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        train: usize,
        #[arg(long, default_value_t = 40)]
        test: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("asp-distill: {e:#}");
            if e.downcast_ref::<asp_distill::config::ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut config = AppConfig::load(cli.config.as_deref())?;
    if let Some(path) = cli.solver {
        config.solver_path = path;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }
    match cli.command {
        Command::Corpus(cmd) => corpus_cmd(cmd),
        Command::Theory(cmd) => theory_cmd(cmd),
        Command::Run(args) => run_cmd(args, &config),
        Command::Experiment(cmd) => experiment_cmd(cmd, &config),
        Command::Replay(args) => replay_cmd(args, &config),
        Command::OracleCheck(args) => oracle_check_cmd(args, &config),
        Command::Fixture(cmd) => fixture_cmd(cmd),
    }
}

fn corpus_cmd(cmd: CorpusCmd) -> anyhow::Result<ExitCode> {
    match cmd {
        CorpusCmd::Validate { path, format } => {
            let examples = load_corpus(&path)?;
            match format {
                Format::Text => println!("ok: {} record(s) in {}", examples.len(), path.display()),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({"records": examples.len(), "path": path.display().to_string()})
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        CorpusCmd::Sample { path, strategy, k, seed, pred, format } => {
            let examples = load_corpus(&path)?;
            let spec = build_sample_spec(strategy, k, seed, pred)?;
            let selected = sample(&examples, &spec)?;
            let ids: Vec<&str> = selected.iter().map(|e| e.id.as_str()).collect();
            match format {
                Format::Text => {
                    for id in &ids {
                        println!("{id}");
                    }
                    eprintln!("sampled {} example(s)", ids.len());
                }
                Format::Json => println!("{}", serde_json::json!({"ids": ids})),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn build_sample_spec(
    strategy: StrategyArg,
    k: usize,
    seed: u64,
    pred: Option<String>,
) -> anyhow::Result<SampleSpec> {
    anyhow::ensure!(k >= 1, "k must be at least 1");
    Ok(match strategy {
        StrategyArg::Count => SampleSpec {
            strategy: SampleStrategy::PredicateCount,
            k,
            seed,
            restrict_to_predicate: pred,
        },
        StrategyArg::Relevance => {
            let pred =
                pred.ok_or_else(|| anyhow::anyhow!("--pred is required for relevance sampling"))?;
            SampleSpec::relevance(pred, k, seed)
        }
    })
}

fn theory_cmd(cmd: TheoryCmd) -> anyhow::Result<ExitCode> {
    match cmd {
        TheoryCmd::Mutate { theory, remove_pred, remove_frac, seed, out } => {
            let text = std::fs::read_to_string(&theory)?;
            let program = parse_program(&text)?;
            let mutated = match (&remove_pred, remove_frac) {
                (Some(pred), None) => remove_rules_mentioning(&program, pred),
                (None, Some(s)) => {
                    anyhow::ensure!(s <= 100, "--remove-frac must be within 0..=100");
                    remove_random_fraction(&program, s, seed)
                }
                _ => anyhow::bail!("exactly one of --remove-pred or --remove-frac is required"),
            };
            let removed = program.len() - mutated.len();
            match out {
                Some(path) => {
                    std::fs::write(&path, mutated.to_text())?;
                    println!(
                        "removed {removed} rule(s); wrote {} rule(s) to {}",
                        mutated.len(),
                        path.display()
                    );
                }
                None => {
                    print!("{}", mutated.to_text());
                    eprintln!("removed {removed} rule(s)");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_theory(path: &Path) -> anyhow::Result<Program> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read theory {}: {e}", path.display()))?;
    Ok(parse_program(&text)?)
}

fn build_backend(
    which: BackendArg,
    config: &AppConfig,
    oracle_rules: Option<&Path>,
    script: Option<&Path>,
    replay: Option<&Path>,
) -> anyhow::Result<Backend> {
    Ok(match which {
        BackendArg::Http => {
            anyhow::ensure!(
                !config.llm.endpoint.is_empty(),
                "llm.endpoint must be configured for the http backend"
            );
            Backend::http(config.llm.clone())
        }
        BackendArg::Null => Backend::null(),
        BackendArg::Oracle => {
            let path = oracle_rules.ok_or_else(|| {
                anyhow::anyhow!("--oracle-rules is required for the oracle backend")
            })?;
            Backend::oracle(load_theory(path)?)
        }
        BackendArg::OracleSyntaxFault | BackendArg::OracleWrongFault => {
            let path = oracle_rules
                .ok_or_else(|| anyhow::anyhow!("--oracle-rules is required for oracle backends"))?;
            let fault = match which {
                BackendArg::OracleSyntaxFault => OracleFault::SyntaxThenCorrect,
                _ => OracleFault::WrongAnswerThenCorrect,
            };
            Backend::oracle_with_fault(load_theory(path)?, fault)
        }
        BackendArg::Scripted => {
            let path = script
                .ok_or_else(|| anyhow::anyhow!("--script is required for the scripted backend"))?;
            Backend::scripted(load_script(path)?)
        }
        BackendArg::Replay => {
            let path = replay
                .ok_or_else(|| anyhow::anyhow!("--replay is required for the replay backend"))?;
            let text = std::fs::read_to_string(path)?;
            let transcript = Transcript::from_jsonl("replay", &text)?;
            Backend::replay_of(&transcript)
        }
    })
}

fn load_script(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    let mut responses = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let response: String = serde_json::from_str(line).map_err(|e| {
            anyhow::anyhow!("{}:{}: expected a JSON string: {e}", path.display(), i + 1)
        })?;
        responses.push(response);
    }
    Ok(responses)
}

fn merge_params(
    base: &DistillParams,
    r: Option<usize>,
    m: Option<usize>,
    batch: Option<usize>,
    no_mend: bool,
) -> anyhow::Result<DistillParams> {
    let mut params = base.clone();
    if let Some(r) = r {
        params.retries = r;
    }
    if let Some(m) = m {
        params.mend_retries = m;
    }
    if let Some(b) = batch {
        params.batch_size = b;
    }
    if no_mend {
        params.mending_enabled = false;
    }
    params.validate().map_err(|e| anyhow::anyhow!(e))?;
    Ok(params)
}

fn run_cmd(args: RunArgs, config: &AppConfig) -> anyhow::Result<ExitCode> {
    let init = load_theory(&args.init)?;
    let corpus = load_corpus(&args.corpus)?;
    let params = merge_params(&config.defaults, args.r, args.m, args.batch, args.no_mend)?;
    let solver = config.solver_config()?;
    let backend = build_backend(
        args.backend,
        config,
        args.oracle_rules.as_deref(),
        args.script.as_deref(),
        args.replay.as_deref(),
    )?;

    let examples: Vec<Example> = match args.strategy {
        Some(strategy) => {
            let k = args.k.ok_or_else(|| anyhow::anyhow!("--k is required with --strategy"))?;
            sample(&corpus, &build_sample_spec(strategy, k, args.seed, args.pred.clone())?)?
        }
        None => corpus.clone(),
    };

    let session_id = format!("run-seed{}", args.seed);
    let log_dir = args.log_dir.clone().unwrap_or_else(|| config.log_dir.join(&session_id));
    let mut logger = RunLogger::create(&log_dir)?;
    // Full parameter/seed record goes to disk before any distillation step.
    logger.write_params(&serde_json::json!({
        "command": "run",
        "init": args.init.display().to_string(),
        "corpus": args.corpus.display().to_string(),
        "backend": backend.kind_name(),
        "params": params,
        "seed": args.seed,
        "session_id": session_id,
        "example_ids": examples.iter().map(|e| e.id.clone()).collect::<Vec<_>>(),
        "solver": solver,
        "config": config,
    }))?;

    let result = run_session(
        SessionSetup {
            init,
            params,
            task: TaskConfig::default(),
            session_id: session_id.clone(),
            backend: &backend,
            solver: &solver,
        },
        &examples,
        Some(&mut logger),
    );

    match args.format {
        Format::Text => {
            println!("session {session_id}: {} example batch(es)", result.outcomes.len());
            println!(
                "accepted {} / rejected {} / already-correct {} (llm calls: {})",
                result.stats.accepted,
                result.stats.rejected,
                result.stats.already_correct,
                result.stats.llm_calls
            );
            println!(
                "final theory: {} rule(s) -> {}",
                result.theory.len(),
                log_dir.join("theory_final.lp").display()
            );
            if let Some(e) = &result.error {
                println!("session aborted early: {e}");
            }
        }
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "session_id": session_id,
                "stats": result.stats,
                "final_rules": result.theory.len(),
                "log_dir": log_dir.display().to_string(),
                "error": result.error,
            })
        ),
    }
    Ok(if result.error.is_some() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

struct ExperimentInputs {
    full: Program,
    train: Vec<Example>,
    test: Vec<Example>,
    backend: BackendSpec,
    cfg: ExperimentConfig,
}

fn prepare_experiment(
    common: &ExperimentCommonArgs,
    mut cfg: ExperimentConfig,
    config: &AppConfig,
) -> anyhow::Result<ExperimentInputs> {
    let full = match &common.theory {
        Some(path) => load_theory(path)?,
        None => fixture::full_theory(),
    };
    let train = match &common.train {
        Some(path) => load_corpus(path)?,
        None => fixture::examples_only(fixture::generate_corpus("train", 40, 7)),
    };
    let test = match &common.test {
        Some(path) => load_corpus(path)?,
        None => fixture::examples_only(fixture::generate_corpus("test", 40, 8)),
    };
    let backend = match common.backend {
        BackendArg::Oracle => BackendSpec::Oracle,
        BackendArg::Null => BackendSpec::Null,
        BackendArg::Http => {
            anyhow::ensure!(
                !config.llm.endpoint.is_empty(),
                "llm.endpoint must be configured for the http backend"
            );
            BackendSpec::Http(config.llm.clone())
        }
        BackendArg::OracleSyntaxFault => BackendSpec::OracleFault(OracleFault::SyntaxThenCorrect),
        BackendArg::OracleWrongFault => {
            BackendSpec::OracleFault(OracleFault::WrongAnswerThenCorrect)
        }
        BackendArg::Scripted => {
            let path = common
                .script
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--script is required for the scripted backend"))?;
            BackendSpec::Scripted(load_script(path)?)
        }
        BackendArg::Replay => anyhow::bail!("the replay backend applies to `run`, not experiments"),
    };
    if !common.seeds.is_empty() {
        cfg = cfg.with_seeds(common.seeds.clone());
    } else if let Some(runs) = common.runs {
        cfg = cfg.with_seeds((1..=runs as u64).map(|i| 100 + i).collect());
    }
    if let Some(k) = common.k {
        cfg.k = k;
    }
    cfg.params = merge_params(&cfg.params, common.r, common.m, None, common.no_mend)?;
    cfg.jobs = config.jobs;
    cfg.log_root = common.log_dir.clone();
    Ok(ExperimentInputs { full, train, test, backend, cfg })
}

fn print_report(report: &ExperimentReport, format: Format) -> ExitCode {
    match format {
        Format::Text => print!("{}", report.render_table()),
        Format::Json => println!("{}", report.to_json()),
    }
    if report.per_run.iter().all(|r| r.session_error.is_some()) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn experiment_cmd(cmd: ExperimentCmd, config: &AppConfig) -> anyhow::Result<ExitCode> {
    let solver = config.solver_config()?;
    match cmd {
        ExperimentCmd::PredicateRemoval { pred, common } => {
            let inputs = prepare_experiment(
                &common,
                ExperimentConfig::predicate_removal_defaults(),
                config,
            )?;
            let report = run_predicate_removal(
                &inputs.full,
                &pred,
                &inputs.train,
                &inputs.test,
                &inputs.backend,
                &solver,
                &inputs.cfg,
            )?;
            Ok(print_report(&report, common.format))
        }
        ExperimentCmd::RandomRemoval { s, common } => {
            let inputs =
                prepare_experiment(&common, ExperimentConfig::random_removal_defaults(), config)?;
            let report = run_random_removal(
                &inputs.full,
                s,
                &inputs.train,
                &inputs.test,
                &inputs.backend,
                &solver,
                &inputs.cfg,
            )?;
            Ok(print_report(&report, common.format))
        }
        ExperimentCmd::Tiered { tier, batch, tier_theory, common } => {
            let inputs =
                prepare_experiment(&common, ExperimentConfig::tiered_defaults(batch), config)?;
            let tier_program = match tier_theory {
                Some(path) => load_theory(&path)?,
                None => {
                    let t = fixture::Tier::parse(&tier).ok_or_else(|| {
                        anyhow::anyhow!("unknown tier '{tier}' (light|medium|heavy)")
                    })?;
                    fixture::tier_theory(t)
                }
            };
            let report = run_tiered_batch(
                &inputs.full,
                &tier_program,
                &inputs.train,
                &inputs.test,
                &inputs.backend,
                &solver,
                &inputs.cfg,
            )?;
            Ok(print_report(&report, common.format))
        }
    }
}

fn replay_cmd(args: ReplayArgs, config: &AppConfig) -> anyhow::Result<ExitCode> {
    let dir = &args.log_dir;
    let params_text = std::fs::read_to_string(dir.join("params.json"))?;
    let params: serde_json::Value = serde_json::from_str(&params_text)?;
    anyhow::ensure!(
        params["command"] == "run",
        "replay currently supports logs written by `asp-distill run`"
    );
    let init = load_theory(Path::new(params["init"].as_str().unwrap_or_default()))?;
    let corpus = load_corpus(params["corpus"].as_str().unwrap_or_default())?;
    let distill_params: DistillParams = serde_json::from_value(params["params"].clone())?;
    let ids: Vec<String> = serde_json::from_value(params["example_ids"].clone())?;
    let session_id = params["session_id"].as_str().unwrap_or("replay").to_string();

    let mut examples = Vec::with_capacity(ids.len());
    for id in &ids {
        let ex = corpus
            .iter()
            .find(|e| &e.id == id)
            .ok_or_else(|| anyhow::anyhow!("example {id} not found in corpus"))?;
        examples.push(ex.clone());
    }

    let transcript_text = std::fs::read_to_string(dir.join("transcript.jsonl"))?;
    let recorded = Transcript::from_jsonl(session_id.clone(), &transcript_text)?;
    let backend = Backend::replay_of(&recorded);
    let solver = config.solver_config()?;

    let result = run_session(
        SessionSetup {
            init,
            params: distill_params,
            task: TaskConfig::default(),
            session_id,
            backend: &backend,
            solver: &solver,
        },
        &examples,
        None,
    );

    let logged_theory = std::fs::read_to_string(dir.join("theory_final.lp"))?;
    let reproduced = result.theory.to_text() == logged_theory && result.error.is_none();
    match args.format {
        Format::Text => {
            if reproduced {
                println!("replay ok: final theory reproduced byte-identically");
            } else {
                println!("replay diverged");
                if let Some(e) = &result.error {
                    println!("error: {e}");
                }
            }
        }
        Format::Json => {
            println!("{}", serde_json::json!({"reproduced": reproduced, "error": result.error}))
        }
    }
    Ok(if reproduced { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn oracle_check_cmd(args: OracleCheckArgs, config: &AppConfig) -> anyhow::Result<ExitCode> {
    let solver: SolverConfig = config.solver_config()?;
    let report = oracle_check(args.n, args.seed, &solver)?;
    match args.format {
        Format::Text => println!(
            "oracle-check: {}/{} random programs agreed with {}",
            report.agreed,
            report.programs,
            solver.executable.display()
        ),
        Format::Json => println!("{}", serde_json::to_value(&report)?),
    }
    Ok(if report.disagreements.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn fixture_cmd(cmd: FixtureCmd) -> anyhow::Result<ExitCode> {
    match cmd {
        FixtureCmd::Gen { out, train, test, seed } => {
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("theory_full.lp"), fixture::full_theory().to_text())?;
            for tier in [fixture::Tier::Light, fixture::Tier::Medium, fixture::Tier::Heavy] {
                let name = format!("theory_{}.lp", tier.name().to_lowercase());
                std::fs::write(out.join(name), fixture::tier_theory(tier).to_text())?;
            }
            let train_examples =
                fixture::examples_only(fixture::generate_corpus("train", train, seed));
            let test_examples =
                fixture::examples_only(fixture::generate_corpus("test", test, seed + 1));
            std::fs::write(
                out.join("train.jsonl"),
                asp_distill::dataset::corpus_to_text(&train_examples),
            )?;
            std::fs::write(
                out.join("test.jsonl"),
                asp_distill::dataset::corpus_to_text(&test_examples),
            )?;
            println!(
                "wrote fixture theory (full + 3 tiers), {} train and {} test example(s) to {}",
                train,
                test,
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
