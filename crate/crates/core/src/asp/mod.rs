//! ASP program representation: parsing, serialization, predicate queries,
//! mutation operators, and a brute-force answer-set checker.
//!
//! The supported syntax is the normal-program fragment (facts, rules,
//! constraints over integer/symbolic/string constants and variables).
//! Statements using richer constructs (choice rules, aggregates, weak
//! constraints, arithmetic) are tokenized and carried verbatim as
//! [`RuleKind::Passthrough`]: they survive serialization and reach an
//! external solver untouched, but are opaque to the checker and to the
//! mutation operators.

mod checker;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use checker::{
    enumerate_answer_sets, enumerate_with_budget, ground, ground_with_budget, is_answer_set,
    reduct, Interpretation, DEFAULT_ATOM_BUDGET,
};
pub use parser::parse_program;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AspError {
    #[error("syntax error at {line}:{col}: {message} (near '{fragment}')")]
    Syntax { line: usize, col: usize, message: String, fragment: String },
    #[error("program is not ground: {detail}")]
    NotGround { detail: String },
    #[error("atom budget exceeded: {atoms} ground atoms (budget {budget})")]
    CapacityExceeded { atoms: usize, budget: usize },
    #[error("statement is opaque to this operation: '{statement}'")]
    Unsupported { statement: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(i64),
    Const(String),
    Str(String),
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Str(s) => write!(f, "\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

/// A possibly negated atom. `negated` is negation as failure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub predicate: String,
    pub terms: Vec<Term>,
    pub negated: bool,
}

impl Literal {
    pub fn atom(predicate: impl Into<String>, terms: Vec<Term>) -> Self {
        Literal { predicate: predicate.into(), terms, negated: false }
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    pub fn is_ground(&self) -> bool {
        self.terms.iter().all(|t| !t.is_var())
    }

    /// The positive form of this literal.
    pub fn positive(&self) -> Literal {
        Literal { negated: false, ..self.clone() }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not ")?;
        }
        write!(f, "{}", self.predicate)?;
        if !self.terms.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.terms.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    Fact,
    Rule,
    Constraint,
    /// Tokenized but not understood; kept verbatim for an external solver.
    Passthrough,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    head: Option<Literal>,
    body: Vec<Literal>,
    source_text: String,
    kind: RuleKind,
}

impl Rule {
    /// Build a normal statement from parts; kind and normalized text are derived.
    pub fn new(head: Option<Literal>, body: Vec<Literal>) -> Rule {
        assert!(
            head.as_ref().map_or(true, |h| !h.negated),
            "rule head must not be negated"
        );
        let kind = match &head {
            None => RuleKind::Constraint,
            Some(h) => {
                if body.is_empty() && h.is_ground() {
                    RuleKind::Fact
                } else {
                    RuleKind::Rule
                }
            }
        };
        let source_text = render_statement(&head, &body);
        Rule { head, body, source_text, kind }
    }

    pub(crate) fn passthrough(normalized_text: String) -> Rule {
        Rule { head: None, body: Vec::new(), source_text: normalized_text, kind: RuleKind::Passthrough }
    }

    pub fn head(&self) -> Option<&Literal> {
        self.head.as_ref()
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn is_passthrough(&self) -> bool {
        self.kind == RuleKind::Passthrough
    }

    pub fn is_ground(&self) -> bool {
        self.head.iter().all(Literal::is_ground) && self.body.iter().all(Literal::is_ground)
    }

    /// Predicate name/arity pairs of head and body. Empty for passthrough.
    pub fn predicates(&self) -> BTreeSet<(String, usize)> {
        self.head
            .iter()
            .chain(self.body.iter())
            .map(|l| (l.predicate.clone(), l.arity()))
            .collect()
    }

    pub fn mentions(&self, predicate: &str) -> bool {
        self.head
            .iter()
            .chain(self.body.iter())
            .any(|l| l.predicate == predicate)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source_text)
    }
}

fn render_statement(head: &Option<Literal>, body: &[Literal]) -> String {
    let mut out = String::new();
    if let Some(h) = head {
        out.push_str(&h.to_string());
    }
    if !body.is_empty() || head.is_none() {
        if head.is_some() {
            out.push(' ');
        }
        out.push_str(":- ");
        for (i, lit) in body.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&lit.to_string());
        }
    }
    out.push('.');
    out
}

/// An ordered, duplicate-free set of statements.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    rules: Vec<Rule>,
    pub label: Option<String>,
}

impl Program {
    /// Exact textual duplicates (by normalized source text) are dropped,
    /// keeping the first occurrence.
    pub fn new(rules: impl IntoIterator<Item = Rule>, label: Option<String>) -> Program {
        let mut seen = BTreeSet::new();
        let rules = rules
            .into_iter()
            .filter(|r| seen.insert(r.source_text.clone()))
            .collect();
        Program { rules, label }
    }

    pub fn empty() -> Program {
        Program::default()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Program {
        self.label = Some(label.into());
        self
    }

    /// This program plus `extra`, duplicates dropped, order preserved.
    pub fn extended(&self, extra: impl IntoIterator<Item = Rule>) -> Program {
        Program::new(self.rules.iter().cloned().chain(extra), self.label.clone())
    }

    pub fn contains_text(&self, source_text: &str) -> bool {
        self.rules.iter().any(|r| r.source_text == source_text)
    }

    /// Every statement rendered one per line; `parse_program` inverts this
    /// exactly, including the label line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(label) = &self.label {
            out.push_str(&format!("%! label: {label}\n"));
        }
        for rule in &self.rules {
            out.push_str(&rule.source_text);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<'a> IntoIterator for &'a Program {
    type Item = &'a Rule;
    type IntoIter = std::slice::Iter<'a, Rule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}

/// Predicate name/arity pairs occurring in any head or body literal.
/// Passthrough statements contribute nothing.
pub fn predicates_of(program: &Program) -> BTreeSet<(String, usize)> {
    program.iter().flat_map(|r| r.predicates()).collect()
}

/// Drop every rule in which `predicate` occurs (head or body).
/// Passthrough statements are opaque and always survive.
pub fn remove_rules_mentioning(program: &Program, predicate: &str) -> Program {
    Program::new(
        program.iter().filter(|r| !r.mentions(predicate)).cloned(),
        program.label.clone(),
    )
}

/// Remove `floor(percent/100 * len)` rules chosen uniformly without
/// replacement by a seeded generator. Deterministic in (program, percent, seed).
pub fn remove_random_fraction(program: &Program, percent: u32, seed: u64) -> Program {
    assert!(percent <= 100, "percent must be within 0..=100");
    let n = program.len();
    let remove = n * percent as usize / 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    // Partial Fisher-Yates: the first `remove` slots are the removed rules.
    for i in 0..remove {
        let j = rng.gen_range(i..n);
        indices.swap(i, j);
    }
    let removed: BTreeSet<usize> = indices[..remove].iter().copied().collect();
    Program::new(
        program
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, r)| r.clone()),
        program.label.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    #[test]
    fn fact_rule_constraint_kinds() {
        let p = prog("a. q(X) :- p(X). :- q(b). r(Y).");
        let kinds: Vec<RuleKind> = p.iter().map(|r| r.kind()).collect();
        // "r(Y)." has a variable in the head, so it is not a fact.
        assert_eq!(kinds, vec![RuleKind::Fact, RuleKind::Rule, RuleKind::Constraint, RuleKind::Rule]);
    }

    #[test]
    fn duplicates_dropped_on_construction() {
        let p = prog("a :- b.  a  :-  b. c.");
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn predicates_of_reads_head_and_body() {
        let p = prog("a :- b, not c.");
        let preds = predicates_of(&p);
        let expected: BTreeSet<(String, usize)> =
            [("a", 0), ("b", 0), ("c", 0)].iter().map(|(s, a)| (s.to_string(), *a)).collect();
        assert_eq!(preds, expected);
    }

    #[test]
    fn predicates_of_clevr_question() {
        let p = prog(
            "end(8). count(8,7). filter_large(7,6). union(6,3,5). filter_cylinder(3,2). \
             filter_cyan(2,1). filter_metal(1,0). filter_cube(5,4). filter_yellow(4,0). scene(0).",
        );
        let preds = predicates_of(&p);
        let expected: BTreeSet<(String, usize)> = [
            ("end", 1),
            ("count", 2),
            ("filter_large", 2),
            ("union", 3),
            ("filter_cylinder", 2),
            ("filter_cyan", 2),
            ("filter_metal", 2),
            ("filter_cube", 2),
            ("filter_yellow", 2),
            ("scene", 1),
        ]
        .iter()
        .map(|(s, a)| (s.to_string(), *a))
        .collect();
        assert_eq!(preds, expected);
    }

    #[test]
    fn predicates_of_empty_program() {
        assert!(predicates_of(&Program::empty()).is_empty());
    }

    #[test]
    fn remove_mentioning_single_match() {
        let p = prog("ans(X) :- query(X). q :- r.");
        let out = remove_rules_mentioning(&p, "query");
        assert_eq!(out.to_text(), "q :- r.\n");
    }

    #[test]
    fn remove_mentioning_absent_pred_is_noop() {
        let p = prog("ans(X) :- query(X). q :- r.");
        assert_eq!(remove_rules_mentioning(&p, "zzz"), p);
    }

    #[test]
    fn remove_mentioning_filters_and_counts() {
        // 12 statements, 3 mentioning `exist`.
        let p = prog(
            "holds(T,O) :- scene(T), obj(O).\
             val(T,yes) :- exist(T,I), holds(I,O).\
             val(T,no) :- exist(T,I), not val(T,yes).\
             good(T) :- exist(T,I).\
             holds(T,O) :- filter_red(T,I), holds(I,O), has_color(O,red).\
             holds(T,O) :- filter_blue(T,I), holds(I,O), has_color(O,blue).\
             ans(V) :- end(T), val(T,V).\
             obj(O) :- has_shape(O,S).\
             holds(T,O) :- union(T,A,B), holds(A,O).\
             holds(T,O) :- union(T,A,B), holds(B,O).\
             val(T,C) :- query_color(T,I), holds(I,O), has_color(O,C).\
             holds(T,O) :- unique(T,I), holds(I,O).",
        );
        assert_eq!(p.len(), 12);
        let mentioning = p.iter().filter(|r| r.mentions("exist")).count();
        assert_eq!(mentioning, 3);
        let out = remove_rules_mentioning(&p, "exist");
        assert_eq!(out.len(), 9);
        assert!(!predicates_of(&out).iter().any(|(name, _)| name == "exist"));
        assert_eq!(out.len() + mentioning, p.len());
    }

    #[test]
    fn remove_random_zero_and_full() {
        let p = prog("a. b. c. d.");
        assert_eq!(remove_random_fraction(&p, 0, 9).len(), 4);
        assert_eq!(remove_random_fraction(&p, 100, 9).len(), 0);
    }

    #[test]
    fn remove_random_is_deterministic() {
        let text: String = (0..60).map(|i| format!("p({i}) :- q({i}).\n")).collect();
        let p = prog(&text);
        let a = remove_random_fraction(&p, 10, 42);
        let b = remove_random_fraction(&p, 10, 42);
        assert_eq!(a, b);
        assert_eq!(a.len(), 54);
        let c = remove_random_fraction(&p, 10, 43);
        assert_eq!(c.len(), 54);
        assert_ne!(a, c, "different seeds should pick different rules");
    }

    #[test]
    fn label_round_trips() {
        let p = prog("a :- b.").with_label("Init");
        let back = parse_program(&p.to_text()).unwrap();
        assert_eq!(back, p);
    }
}
