//! Chain-of-thought filtering for self-consistency decoding: score each
//! sampled rationale against the statement form of its own prediction, keep
//! the top k, and vote.

pub mod fixtures;
mod filter;
mod pipeline;
mod sample;

use thiserror::Error;

pub use filter::{filter_top_k, majority_vote, FilterConfig, TieBreak, TopK};
pub use pipeline::{
    decide, evaluate, k_ablation, run_pipeline, score_groups, KAblation, KPoint, PipelineReport, QuestionTrace,
    SampleTrace, ScoredGroup, DEFAULT_K_SET,
};
pub use sample::{group_samples, hypothesis_for_sample, CotSample, HypothesisCache, QuestionGroup};

#[derive(Debug, Error)]
pub enum SelfConsistencyError {
    #[error("{0}")]
    Invalid(String),
    #[error("question {0} has no gold answer")]
    MissingGold(String),
    #[error(transparent)]
    Scoring(#[from] crate::scoring::ScoringError),
}
