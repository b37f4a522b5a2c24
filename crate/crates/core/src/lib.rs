//! Maintains, validates, and automatically extends an answer-set-programming
//! theory for a question-answering task by distilling rules from a pluggable
//! language-model backend, with solver-feedback mending, regression testing,
//! and a reproducible experiment harness.

pub mod asp;
pub mod config;
pub mod dataset;
pub mod distill;
pub mod experiment;
pub mod fixture;
pub mod llm;
pub mod logging;
pub mod solver;
