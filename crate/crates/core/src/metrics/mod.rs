//! Macro-F1, the majority baseline, grouped reports and annotator agreement.

mod agreement;
mod f1;
mod report;

use thiserror::Error;

pub use agreement::{
    agreement_summary, binary_count_row, collapse_annotation, fleiss_kappa, group_by_instance,
    judgment_count_row, majority_verdict, pairwise_agreement, AgreementLabels, AgreementSummary,
    AnnotationRecord, Judgment, PairwiseAgreement,
};
pub use f1::{class_stats, macro_f1, macro_f1_with, majority_baseline, majority_label, AbsentClassPolicy, ClassStats};
pub use report::{
    eval_report, grouped_report, grouped_report_with, EvalReport, GroupEntry, GroupKey, GroupedReport,
    ResultsTable, DEFAULT_MIN_GROUP_FRACTION, UNTAGGED,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{predictions} predictions but {golds} golds")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("ragged count matrix: {0}")]
    Ragged(String),
    #[error("rater {rater} judged instance {instance} more than once")]
    DuplicateRating { instance: String, rater: String },
    #[error("unknown group key {0:?} (expected dataset, category or reasoning_type)")]
    UnknownGroupKey(String),
}
