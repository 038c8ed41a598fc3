//! Prompting, backend access and the normalized Yes/No entailment score.

pub mod backend;
pub mod cache;
pub mod http;
mod score;
mod scorer;
pub mod template;

use thiserror::Error;

pub use backend::{Backend, BackendError, BackendReply, Capability, MockBackend, RetryPolicy, TokenProb};
pub use cache::{CacheKey, DirCache, MemoryCache, ReplyCache};
pub use http::{ApiMode, HttpBackend};
pub use score::{
    classify, entailment_score, first_token, label_from_generation, GeneratedLabel, ScoringConfig,
    UnmatchedPolicy,
};
pub use scorer::{batch_score, parallel_map, EntailmentScore, PairScore, ScoredInstance, Scorer};
pub use template::{Demo, PromptTemplate};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid template: {0}")]
    Template(String),
    #[error("invalid scoring config: {0}")]
    Config(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}
