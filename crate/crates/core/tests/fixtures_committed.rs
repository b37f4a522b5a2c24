//! The files under `fixtures/` are committed for direct CLI use; they must
//! stay identical to what `asp-distill fixture gen --seed 7` produces.

use std::path::PathBuf;

use asp_distill::dataset::corpus_to_text;
use asp_distill::fixture::{self, Tier};

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

#[test]
fn committed_theories_match_generator() {
    assert_eq!(read("theory_full.lp"), fixture::full_theory().to_text());
    assert_eq!(read("theory_light.lp"), fixture::tier_theory(Tier::Light).to_text());
    assert_eq!(read("theory_medium.lp"), fixture::tier_theory(Tier::Medium).to_text());
    assert_eq!(read("theory_heavy.lp"), fixture::tier_theory(Tier::Heavy).to_text());
}

#[test]
fn committed_corpora_match_generator() {
    let train = fixture::examples_only(fixture::generate_corpus("train", 40, 7));
    let test = fixture::examples_only(fixture::generate_corpus("test", 40, 8));
    assert_eq!(read("train.jsonl"), corpus_to_text(&train));
    assert_eq!(read("test.jsonl"), corpus_to_text(&test));
}
