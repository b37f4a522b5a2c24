//! Application configuration: built-in defaults, overridden by a sectioned
//! key-value config file, overridden by `ASP_DISTILL_*` environment
//! variables; command-line flags are applied on top by the CLI. The merged
//! configuration is logged with every run. Secrets never live here: the
//! remote credential is read from its own environment variable at call time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distill::DistillParams;
use crate::llm::HttpConfig;
use crate::solver::{SolverConfig, SolverError, DEFAULT_TIMEOUT_MS};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("config value for {key}: {message}")]
    Value { key: String, message: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AppConfig {
    /// Solver executable; empty means "resolve automatically".
    pub solver_path: PathBuf,
    pub solver_flags: Vec<String>,
    pub solver_timeout_ms: u64,
    pub solver_answer_predicate: String,
    pub llm: HttpConfig,
    pub defaults: DistillParams,
    pub log_dir: PathBuf,
    pub seeds: Vec<u64>,
    pub jobs: usize,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            solver_path: PathBuf::new(),
            solver_flags: Vec::new(),
            solver_timeout_ms: DEFAULT_TIMEOUT_MS,
            solver_answer_predicate: "ans".to_string(),
            llm: HttpConfig::default(),
            defaults: DistillParams::default(),
            log_dir: PathBuf::from("runs"),
            seeds: (1..=5).map(|i| 100 + i).collect(),
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

impl AppConfig {
    /// Defaults, then the config file (if any), then the environment.
    pub fn load(file: Option<&Path>) -> Result<AppConfig, ConfigError> {
        let mut cfg = AppConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            for (key, value, line) in parse_kv(&text, &path.display().to_string())? {
                cfg.apply(&key, &value).map_err(|message| ConfigError::Parse {
                    path: path.display().to_string(),
                    line,
                    message,
                })?;
            }
        }
        cfg.apply_env();
        Ok(cfg)
    }

    /// Apply one dotted key. Unknown keys are an error.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_u64 = |v: &str| v.parse::<u64>().map_err(|e| format!("expected integer: {e}"));
        let parse_usize = |v: &str| v.parse::<usize>().map_err(|e| format!("expected integer: {e}"));
        let parse_bool = |v: &str| match v {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            other => Err(format!("expected boolean, got '{other}'")),
        };
        match key {
            "solver.path" => self.solver_path = PathBuf::from(value),
            "solver.flags" => {
                self.solver_flags = value.split_whitespace().map(str::to_string).collect()
            }
            "solver.timeout_ms" => self.solver_timeout_ms = parse_u64(value)?,
            "solver.answer_predicate" => self.solver_answer_predicate = value.to_string(),
            "llm.endpoint" => self.llm.endpoint = value.to_string(),
            "llm.model" => self.llm.model = value.to_string(),
            "llm.temperature" => {
                self.llm.temperature =
                    value.parse().map_err(|e| format!("expected number: {e}"))?
            }
            "llm.max_retries" => self.llm.max_retries = parse_u64(value)? as u32,
            "llm.credential_env" => self.llm.credential_env = value.to_string(),
            "defaults.r" => self.defaults.retries = parse_usize(value)?,
            "defaults.m" => self.defaults.mend_retries = parse_usize(value)?,
            "defaults.batch" => self.defaults.batch_size = parse_usize(value)?,
            "defaults.mending" => self.defaults.mending_enabled = parse_bool(value)?,
            "defaults.no_facts_guard" => self.defaults.no_facts_guard = parse_bool(value)?,
            "paths.log_dir" => self.log_dir = PathBuf::from(value),
            "seeds" => {
                self.seeds = value
                    .split(',')
                    .map(|s| s.trim().parse::<u64>().map_err(|e| format!("bad seed: {e}")))
                    .collect::<Result<_, _>>()?
            }
            "jobs" => self.jobs = parse_usize(value)?,
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }

    /// `ASP_DISTILL_<SECTION>_<KEY>` environment overrides.
    fn apply_env(&mut self) {
        let mappings = [
            ("ASP_DISTILL_SOLVER_PATH", "solver.path"),
            ("ASP_DISTILL_SOLVER_FLAGS", "solver.flags"),
            ("ASP_DISTILL_SOLVER_TIMEOUT_MS", "solver.timeout_ms"),
            ("ASP_DISTILL_SOLVER_ANSWER_PREDICATE", "solver.answer_predicate"),
            ("ASP_DISTILL_LLM_ENDPOINT", "llm.endpoint"),
            ("ASP_DISTILL_LLM_MODEL", "llm.model"),
            ("ASP_DISTILL_LLM_TEMPERATURE", "llm.temperature"),
            ("ASP_DISTILL_LLM_MAX_RETRIES", "llm.max_retries"),
            ("ASP_DISTILL_LLM_CREDENTIAL_ENV", "llm.credential_env"),
            ("ASP_DISTILL_LOG_DIR", "paths.log_dir"),
            ("ASP_DISTILL_JOBS", "jobs"),
        ];
        for (var, key) in mappings {
            if let Ok(value) = std::env::var(var) {
                if !value.is_empty() {
                    // Malformed env values keep the earlier setting.
                    let _ = self.apply(key, &value);
                }
            }
        }
    }

    /// The effective solver configuration, resolving the executable when the
    /// path was left empty.
    pub fn solver_config(&self) -> Result<SolverConfig, SolverError> {
        let mut cfg = if self.solver_path.as_os_str().is_empty() {
            SolverConfig::resolve_default()?
        } else {
            SolverConfig::new(self.solver_path.clone())
        };
        cfg.extra_flags = self.solver_flags.clone();
        cfg.timeout_ms = self.solver_timeout_ms;
        cfg.answer_predicate = self.solver_answer_predicate.clone();
        Ok(cfg)
    }
}

/// Parse the sectioned key-value format: `[section]` headers, `key = value`
/// lines, `#` comments. Returns dotted keys with their line numbers.
fn parse_kv(text: &str, path: &str) -> Result<Vec<(String, String, usize)>, ConfigError> {
    let mut out = Vec::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                path: path.to_string(),
                line: i + 1,
                message: "unterminated section header".to_string(),
            })?;
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                path: path.to_string(),
                line: i + 1,
                message: format!("expected 'key = value', got '{line}'"),
            });
        };
        let key = key.trim();
        let dotted =
            if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        out.push((dotted, value.trim().to_string(), i + 1));
    }
    Ok(out)
}
