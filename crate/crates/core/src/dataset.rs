//! Example corpus handling: loading question/scene/answer records,
//! translating functional question representations into ASP facts, and the
//! two example-sampling strategies.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asp::{self, parse_program, AspError, Literal, Program, Rule, RuleKind, Term};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("record {record}: {message}")]
    Format { record: usize, message: String },
    #[error("record {record}: {source}")]
    Parse {
        record: usize,
        #[source]
        source: AspError,
    },
    #[error("malformed functional tree: {detail}")]
    MalformedTree { detail: String },
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("sample bucket '{key}' is empty")]
    EmptyBucket { key: String },
    #[error("no question mentions predicate '{predicate}'")]
    UnknownPredicate { predicate: String },
    #[error("predicate-relevance sampling needs restrict_to_predicate")]
    MissingPredicate,
}

/// One question/scene/answer tuple, with fields derived from the question.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub id: String,
    pub question: Program,
    pub scene: Program,
    pub expected_answer: String,
    pub question_predicates: BTreeSet<(String, usize)>,
    pub predicate_count: usize,
}

impl Example {
    pub fn new(
        id: impl Into<String>,
        question: Program,
        scene: Program,
        expected_answer: impl Into<String>,
    ) -> Result<Example, String> {
        for (name, program) in [("question", &question), ("scene", &scene)] {
            if let Some(bad) = program.iter().find(|r| r.kind() != RuleKind::Fact) {
                return Err(format!("{name} must contain facts only, found '{}'", bad.source_text()));
            }
        }
        let question_predicates = asp::predicates_of(&question);
        let predicate_count = question.len();
        Ok(Example {
            id: id.into(),
            question,
            scene,
            expected_answer: expected_answer.into(),
            question_predicates,
            predicate_count,
        })
    }

    pub fn mentions(&self, predicate: &str) -> bool {
        self.question_predicates.iter().any(|(name, _)| name == predicate)
    }
}

/// Serialized corpus record: one JSON object per line.
#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: String,
    question_asp: String,
    scene_asp: String,
    answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    functional: Option<FunctionalNode>,
}

/// A node of the functional question representation; leaves are `scene` ops.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalNode {
    pub op: String,
    #[serde(default)]
    pub inputs: Vec<FunctionalNode>,
}

impl FunctionalNode {
    pub fn leaf(op: impl Into<String>) -> FunctionalNode {
        FunctionalNode { op: op.into(), inputs: Vec::new() }
    }

    pub fn node(op: impl Into<String>, inputs: Vec<FunctionalNode>) -> FunctionalNode {
        FunctionalNode { op: op.into(), inputs }
    }
}

/// Load a line-delimited corpus file. Record order is preserved.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Example>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&text)
}

pub fn parse_corpus(text: &str) -> Result<Vec<Example>, DatasetError> {
    let mut examples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = serde_json::from_str(line)
            .map_err(|e| DatasetError::Format { record: idx, message: e.to_string() })?;
        let question = parse_program(&record.question_asp)
            .map_err(|source| DatasetError::Parse { record: idx, source })?;
        let scene = parse_program(&record.scene_asp)
            .map_err(|source| DatasetError::Parse { record: idx, source })?;
        if let Some(functional) = &record.functional {
            // A provided tree must agree with the listed question facts.
            let derived = translate_functional_to_asp(functional)
                .map_err(|e| DatasetError::Format { record: idx, message: e.to_string() })?;
            let want: BTreeSet<&str> = derived.iter().map(Rule::source_text).collect();
            let got: BTreeSet<&str> = question.iter().map(Rule::source_text).collect();
            if want != got {
                return Err(DatasetError::Format {
                    record: idx,
                    message: "functional tree does not match question_asp".to_string(),
                });
            }
        }
        let example = Example::new(record.id, question, scene, record.answer)
            .map_err(|message| DatasetError::Format { record: idx, message })?;
        examples.push(example);
    }
    Ok(examples)
}

/// Render examples back to the corpus line format.
pub fn corpus_to_text(examples: &[Example]) -> String {
    let mut out = String::new();
    for ex in examples {
        let record = RawRecord {
            id: ex.id.clone(),
            question_asp: ex.question.to_text().trim_end().replace('\n', " "),
            scene_asp: ex.scene.to_text().trim_end().replace('\n', " "),
            answer: ex.expected_answer.clone(),
            functional: None,
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    out
}

fn fact(predicate: &str, terms: Vec<Term>) -> Rule {
    Rule::new(Some(Literal::atom(predicate, terms)), Vec::new())
}

/// Translate a functional question tree into indexed ASP facts.
///
/// Nodes are numbered in post-order with children visited left to right; the
/// first `scene` leaf gets index 0 and all further `scene` leaves reuse it.
/// Each non-scene node yields `op(out, in_1, ..., in_k)`, and the root index
/// is marked with `end(root)`.
pub fn translate_functional_to_asp(root: &FunctionalNode) -> Result<Program, DatasetError> {
    fn walk(
        node: &FunctionalNode,
        next: &mut i64,
        scene_index: &mut Option<i64>,
        facts: &mut Vec<Rule>,
    ) -> Result<i64, DatasetError> {
        if node.op == "scene" {
            if !node.inputs.is_empty() {
                return Err(DatasetError::MalformedTree {
                    detail: "scene node must be a leaf".to_string(),
                });
            }
            if let Some(idx) = scene_index {
                return Ok(*idx);
            }
            facts.push(fact("scene", vec![Term::Int(0)]));
            *scene_index = Some(0);
            *next = 1;
            return Ok(0);
        }
        if node.inputs.is_empty() {
            return Err(DatasetError::MalformedTree {
                detail: format!("leaf node '{}' is not a scene node", node.op),
            });
        }
        let mut input_indices = Vec::with_capacity(node.inputs.len());
        for child in &node.inputs {
            input_indices.push(walk(child, next, scene_index, facts)?);
        }
        let out = *next;
        *next += 1;
        let mut terms = vec![Term::Int(out)];
        terms.extend(input_indices.into_iter().map(Term::Int));
        facts.push(fact(&node.op, terms));
        Ok(out)
    }

    let mut facts = Vec::new();
    let mut next = 1;
    let mut scene_index = None;
    let root_index = walk(root, &mut next, &mut scene_index, &mut facts)?;
    if scene_index.is_none() {
        return Err(DatasetError::MalformedTree { detail: "tree has no scene leaf".to_string() });
    }
    facts.push(fact("end", vec![Term::Int(root_index)]));
    Ok(Program::new(facts, None))
}

/// Group a corpus by the number of predicate occurrences in the question.
pub fn group_by_predicate_count(corpus: &[Example]) -> BTreeMap<usize, Vec<Example>> {
    let mut groups: BTreeMap<usize, Vec<Example>> = BTreeMap::new();
    for ex in corpus {
        groups.entry(ex.predicate_count).or_default().push(ex.clone());
    }
    groups
}

/// Group a corpus by the predicates appearing in the question; an example
/// appears under every predicate it mentions.
pub fn group_by_predicate_relevance(corpus: &[Example]) -> BTreeMap<String, Vec<Example>> {
    let mut groups: BTreeMap<String, Vec<Example>> = BTreeMap::new();
    for ex in corpus {
        for (name, _) in &ex.question_predicates {
            groups.entry(name.clone()).or_default().push(ex.clone());
        }
    }
    groups
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleStrategy {
    PredicateCount,
    PredicateRelevance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSpec {
    pub strategy: SampleStrategy,
    pub k: usize,
    pub seed: u64,
    pub restrict_to_predicate: Option<String>,
}

impl SampleSpec {
    pub fn count(k: usize, seed: u64) -> SampleSpec {
        assert!(k >= 1);
        SampleSpec { strategy: SampleStrategy::PredicateCount, k, seed, restrict_to_predicate: None }
    }

    pub fn relevance(predicate: impl Into<String>, k: usize, seed: u64) -> SampleSpec {
        assert!(k >= 1);
        SampleSpec {
            strategy: SampleStrategy::PredicateRelevance,
            k,
            seed,
            restrict_to_predicate: Some(predicate.into()),
        }
    }
}

/// Draw `k` from a bucket: without replacement when the bucket is large
/// enough, with replacement otherwise.
fn draw(bucket: &[Example], k: usize, rng: &mut ChaCha8Rng) -> Vec<Example> {
    if bucket.len() >= k {
        let mut indices: Vec<usize> = (0..bucket.len()).collect();
        for i in 0..k {
            let j = rng.gen_range(i..indices.len());
            indices.swap(i, j);
        }
        indices[..k].iter().map(|&i| bucket[i].clone()).collect()
    } else {
        (0..k).map(|_| bucket[rng.gen_range(0..bucket.len())].clone()).collect()
    }
}

/// Sample per [`SampleSpec`]. Deterministic in (corpus, spec).
///
/// PredicateCount draws k per bucket (total `k * #buckets`); PredicateRelevance
/// draws exactly k from the bucket of `restrict_to_predicate`.
pub fn sample(corpus: &[Example], spec: &SampleSpec) -> Result<Vec<Example>, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.strategy {
        SampleStrategy::PredicateCount => {
            let groups = group_by_predicate_count(corpus);
            let mut out = Vec::with_capacity(spec.k * groups.len());
            for bucket in groups.values() {
                if bucket.is_empty() {
                    return Err(DatasetError::EmptyBucket { key: "predicate-count".into() });
                }
                out.extend(draw(bucket, spec.k, &mut rng));
            }
            Ok(out)
        }
        SampleStrategy::PredicateRelevance => {
            let predicate = spec
                .restrict_to_predicate
                .as_deref()
                .ok_or(DatasetError::MissingPredicate)?;
            let groups = group_by_predicate_relevance(corpus);
            let bucket = groups
                .get(predicate)
                .ok_or_else(|| DatasetError::UnknownPredicate { predicate: predicate.to_string() })?;
            if bucket.is_empty() {
                return Err(DatasetError::EmptyBucket { key: predicate.to_string() });
            }
            Ok(draw(bucket, spec.k, &mut rng))
        }
    }
}
