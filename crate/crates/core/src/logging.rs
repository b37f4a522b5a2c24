//! Per-run log directory: parameters and seeds first, then the transcript
//! streamed turn by turn, per-batch outcomes, and the final theory.
//!
//! Layout: `params.json`, `transcript.jsonl`, `outcomes.jsonl`,
//! `theory_final.lp`. Parameters are written before any distillation step
//! so a crashed run still documents what it was doing.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::asp::Program;
use crate::llm::Transcript;

pub struct RunLogger {
    dir: PathBuf,
    transcript: File,
    outcomes: File,
    logged_turns: usize,
}

impl RunLogger {
    pub fn create(dir: impl Into<PathBuf>) -> io::Result<RunLogger> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let transcript = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(dir.join("transcript.jsonl"))?;
        let outcomes = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(dir.join("outcomes.jsonl"))?;
        Ok(RunLogger { dir, transcript, outcomes, logged_turns: 0 })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write the fully merged parameter/seed record. Call before distilling.
    pub fn write_params(&self, params: &serde_json::Value) -> io::Result<()> {
        let text = serde_json::to_string_pretty(params)?;
        std::fs::write(self.dir.join("params.json"), text + "\n")
    }

    /// Append any transcript turns not yet on disk and flush.
    pub fn sync_transcript(&mut self, transcript: &Transcript) -> io::Result<()> {
        for turn in &transcript.turns()[self.logged_turns..] {
            serde_json::to_writer(&mut self.transcript, turn)?;
            self.transcript.write_all(b"\n")?;
        }
        self.logged_turns = transcript.turns().len();
        self.transcript.flush()
    }

    pub fn log_outcome<T: serde::Serialize>(&mut self, outcome: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.outcomes, outcome)?;
        self.outcomes.write_all(b"\n")?;
        self.outcomes.flush()
    }

    pub fn write_final_theory(&self, theory: &Program) -> io::Result<()> {
        std::fs::write(self.dir.join("theory_final.lp"), theory.to_text())
    }

    /// Write an experiment report (JSON plus rendered table).
    pub fn write_report(dir: impl AsRef<Path>, json: &serde_json::Value, table: &str) -> io::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(json)? + "\n")?;
        std::fs::write(dir.join("report.txt"), table)
    }
}
