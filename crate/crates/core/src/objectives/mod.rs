//! Classification and margin-ranking objectives on a small hashed-feature
//! logistic scorer, with exact gradients and a deterministic trainer.

mod loss;
mod model;
mod stats;
pub mod synthetic;
mod train;

use std::path::PathBuf;

use thiserror::Error;

pub use loss::{
    batch_loss, classification_loss, gradient, ranking_loss, ranking_loss_with, Example, Gradient, LossSettings,
    Objective, RankingOrientation, LOSS_EPS,
};
pub use model::{tokenize, Featurizer, SparseVec, TinyScorer, DEFAULT_DIM};
pub use stats::{decision_margin_stats, GradeStats, MarginStats, HISTOGRAM_BINS};
pub use train::{dev_metric, pair_accuracy, train, Checkpoint, LogRecord, TrainData, TrainOutcome, TrainingConfig};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("empty {0} data")]
    EmptyData(&'static str),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Format(String),
}
