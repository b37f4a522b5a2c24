//! A small, dependency-free grounder and answer-set solver.
//!
//! tinyasp accepts the normal-program fragment of ASP (facts, rules with
//! negation as failure, integrity constraints; integer, symbolic-constant,
//! string, and variable terms) and enumerates answer sets. The command-line
//! driver mimics the clingo conventions that matter for scripting: `--models=N`,
//! `--outf=2` for JSON output, `Answer:`/`SATISFIABLE` text output, and the
//! usual exit codes (10/20/30 for results, 65 for input errors).
//!
//! It exists so that pipelines developed against a full ASP system keep
//! working on machines where none is installed. It is not a competitive
//! solver: grounding is bottom-up over possible atoms, stratified programs
//! are evaluated as least fixpoints, and everything else falls back to
//! bounded enumeration with the stability test.

mod ground;
mod solve;
pub mod syntax;

use std::fmt;
use std::io::Read;

pub use ground::{ground, GroundProgram};
pub use syntax::{parse, ParseError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    Parse(ParseError),
    UnsafeVariable { variable: String, line: usize },
    TooLarge(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(e) => write!(f, "parsing failed: {e}"),
            Error::UnsafeVariable { variable, line } => {
                write!(f, "grounding failed: unsafe variable '{variable}' in rule at line {line}")
            }
            Error::TooLarge(msg) => write!(f, "capacity exceeded: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutput {
    /// Answer sets as sorted atom strings, in deterministic order.
    pub models: Vec<Vec<String>>,
    /// False when `max_models` cut enumeration short.
    pub exhausted: bool,
}

/// Parse, ground, and solve `text`. `max_models = 0` enumerates everything.
pub fn solve_text(text: &str, max_models: usize) -> Result<SolveOutput, Error> {
    let rules = syntax::parse(text)?;
    let program = ground::ground(&rules)?;
    let (models, exhausted) = solve::answer_sets(&program, max_models)?;
    let rendered = models
        .into_iter()
        .map(|m| m.into_iter().map(|id| program.atom_name(id)).collect())
        .collect();
    Ok(SolveOutput { models: rendered, exhausted })
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn print_human(out: &SolveOutput, sources: &[String]) {
    println!("tinyasp version {VERSION}");
    for s in sources {
        println!("Reading from {s}");
    }
    println!("Solving...");
    for (i, model) in out.models.iter().enumerate() {
        println!("Answer: {}", i + 1);
        println!("{}", model.join(" "));
    }
    if out.models.is_empty() {
        println!("UNSATISFIABLE");
    } else {
        println!("SATISFIABLE");
    }
    println!();
    println!(
        "Models       : {}{}",
        out.models.len(),
        if out.exhausted { "" } else { "+" }
    );
}

fn print_json(out: &SolveOutput) {
    let witnesses: Vec<String> = out
        .models
        .iter()
        .map(|m| {
            let vals: Vec<String> =
                m.iter().map(|a| format!("\"{}\"", json_escape(a))).collect();
            format!("{{\"Value\": [{}]}}", vals.join(", "))
        })
        .collect();
    let result = if out.models.is_empty() { "UNSATISFIABLE" } else { "SATISFIABLE" };
    println!(
        "{{\"Solver\": \"tinyasp version {VERSION}\", \"Result\": \"{result}\", \
         \"Call\": [{{\"Witnesses\": [{}]}}], \
         \"Models\": {{\"Number\": {}, \"More\": \"{}\"}}}}",
        witnesses.join(", "),
        out.models.len(),
        if out.exhausted { "no" } else { "yes" }
    );
}

const USAGE: &str = "usage: tinyasp [--models=N|-n N] [--outf=0|2] [--version] [--help] [FILE...]
Reads an ASP program (normal rules, constraints, facts) from FILEs or stdin
and prints its answer sets. --models=0 (default) enumerates all of them.";

/// Command-line driver. Returns the process exit code.
pub fn run_cli<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let mut max_models: usize = 0;
    let mut json = false;
    let mut files: Vec<String> = Vec::new();
    let mut args = args.into_iter();
    while let Some(arg) = args.next() {
        if arg == "--help" || arg == "-h" {
            println!("{USAGE}");
            return 0;
        } else if arg == "--version" || arg == "-v" {
            println!("tinyasp version {VERSION}");
            return 0;
        } else if let Some(n) = arg.strip_prefix("--models=") {
            match n.parse() {
                Ok(n) => max_models = n,
                Err(_) => {
                    eprintln!("tinyasp: invalid --models value '{n}'");
                    return 2;
                }
            }
        } else if arg == "-n" {
            match args.next().as_deref().map(str::parse) {
                Some(Ok(n)) => max_models = n,
                _ => {
                    eprintln!("tinyasp: -n requires a number");
                    return 2;
                }
            }
        } else if let Some(mode) = arg.strip_prefix("--outf=") {
            match mode {
                "0" => json = false,
                "2" => json = true,
                other => {
                    eprintln!("tinyasp: unsupported output format '{other}'");
                    return 2;
                }
            }
        } else if arg.starts_with('-') && arg != "-" {
            eprintln!("tinyasp: unknown option '{arg}'");
            eprintln!("{USAGE}");
            return 2;
        } else {
            files.push(arg);
        }
    }

    let mut text = String::new();
    let mut sources = Vec::new();
    if files.is_empty() {
        files.push("-".to_string());
    }
    for f in &files {
        if f == "-" {
            sources.push("stdin".to_string());
            if std::io::stdin().read_to_string(&mut text).is_err() {
                eprintln!("*** ERROR: (tinyasp): cannot read stdin");
                return 65;
            }
        } else {
            sources.push(f.clone());
            match std::fs::read_to_string(f) {
                Ok(s) => text.push_str(&s),
                Err(e) => {
                    eprintln!("*** ERROR: (tinyasp): cannot read '{f}': {e}");
                    return 65;
                }
            }
        }
        text.push('\n');
    }

    match solve_text(&text, max_models) {
        Ok(out) => {
            if json {
                print_json(&out);
            } else {
                print_human(&out, &sources);
            }
            if out.models.is_empty() {
                20
            } else if out.exhausted {
                30
            } else {
                10
            }
        }
        Err(e) => {
            eprintln!("*** ERROR: (tinyasp): {e}");
            65
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_text_end_to_end() {
        let out = solve_text("a :- not b. b :- not a.", 0).unwrap();
        assert_eq!(out.models, vec![vec!["a".to_string()], vec!["b".to_string()]]);
        assert!(out.exhausted);
    }

    #[test]
    fn model_limit_reported() {
        let out = solve_text("a :- not b. b :- not a.", 1).unwrap();
        assert_eq!(out.models.len(), 1);
        assert!(!out.exhausted);
    }

    #[test]
    fn parse_error_surfaces() {
        assert!(matches!(solve_text("a :- b", 0), Err(Error::Parse(_))));
    }
}
