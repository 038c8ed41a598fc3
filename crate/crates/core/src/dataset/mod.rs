//! Source ingestion, conversion to binary entailment instances, and ranking
//! negative mining.

mod convert;
pub mod io;
mod mining;
pub mod statement;
mod types;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use convert::{
    convert_nli, convert_nli_items, convert_qa, convert_qa_items, convert_rationale,
    convert_rationale_items, ConversionReport, CONVERTER_RULE_KEY, OPTION_ROLE_KEY,
};
pub use io::{load_instances, load_source, read_records, write_instances, write_records, Record, SourceSchema};
pub use mining::{
    build_negative_generation_prompt, mine_negatives_from_options, pairs_from_generated,
    parse_generated_negatives, ParsedNegatives, MAX_GENERATED_NEGATIVES,
};
pub use statement::{question_to_statement, RuleConverter, Statement, StatementConverter, StatementRule};
pub use types::{
    validate_collection, Category, EvInstance, ExplainedChoice, Label, NliItem, NliLabel, Provenance,
    QaItem, RankPair, RationaleItem, ReasoningType,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}invalid `{field}`: {reason}", line_prefix(*line))]
    Invalid {
        line: Option<usize>,
        field: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Parse {
        line: usize,
        field: Option<String>,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {inner}")]
    InFile {
        path: PathBuf,
        inner: Box<DatasetError>,
    },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl DatasetError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        DatasetError::Invalid {
            line: None,
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Attaches a line number to a validation error that lacks one.
    pub(crate) fn at_line(self, lineno: usize) -> Self {
        match self {
            DatasetError::Invalid { line: None, field, reason } => DatasetError::Invalid {
                line: Some(lineno),
                field,
                reason,
            },
            other => other,
        }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (DatasetError::Io { .. } | DatasetError::InFile { .. }) => e,
            e => DatasetError::InFile {
                path: path.to_path_buf(),
                inner: Box::new(e),
            },
        }
    }

    pub(crate) fn from_json(line: usize, err: &serde_json::Error) -> Self {
        let message = err.to_string();
        // serde names the field as `name` in missing/unknown/duplicate field errors
        let field = message
            .split('`')
            .nth(1)
            .filter(|_| message.contains("field"))
            .map(str::to_string);
        DatasetError::Parse { line, field, message }
    }

    /// The error with file context stripped.
    pub fn root(&self) -> &DatasetError {
        match self {
            DatasetError::InFile { inner, .. } => inner.root(),
            other => other,
        }
    }

    /// True for malformed or invalid records, as opposed to I/O failures.
    pub fn is_schema_violation(&self) -> bool {
        matches!(self.root(), DatasetError::Invalid { .. } | DatasetError::Parse { .. })
    }
}
