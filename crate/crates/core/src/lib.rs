//! Entailment verification toolkit.
//!
//! The crate is organised around the life of a premise–hypothesis pair:
//!
//! - [`dataset`] turns NLI, contextual-QA and rationale sources into binary
//!   [`EvInstance`](dataset::EvInstance) records and mines ranking negatives.
//! - [`scoring`] renders prompts, queries a completion backend and turns the
//!   Yes/No next-token probabilities into a normalized entailment score.
//! - [`metrics`] computes macro-F1, the majority baseline and annotator
//!   agreement statistics.
//! - [`objectives`] holds the classification and margin-ranking objectives on
//!   a small hashed-feature scorer, with exact gradients and a trainer.
//! - [`selfconsistency`] filters sampled chain-of-thought rationales by
//!   entailment score before majority voting.
//! - [`cli`] wires the above into reproducible commands with run manifests.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod cli;
pub mod dataset;
pub mod metrics;
pub mod objectives;
pub mod scoring;
pub mod selfconsistency;

mod hashing;

pub use dataset::{Category, EvInstance, Label, RankPair, ReasoningType};
pub use scoring::{EntailmentScore, ScoringConfig};
