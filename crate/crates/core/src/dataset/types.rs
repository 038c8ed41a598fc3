use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DatasetError;

/// Binary entailment-verification label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Support,
    NotSupport,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Support, Label::NotSupport];

    pub fn flip(self) -> Label {
        match self {
            Label::Support => Label::NotSupport,
            Label::NotSupport => Label::Support,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Support => "support",
            Label::NotSupport => "not_support",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Source category an instance was converted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Nli,
    ContextualQa,
    Rationale,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Nli => "nli",
            Category::ContextualQa => "contextual_qa",
            Category::Rationale => "rationale",
        }
    }
}

/// Annotated reasoning type: simple deduction (R1), multi-step deduction (R2),
/// missing entity-grounded or commonsense knowledge (R3), missing localized
/// knowledge (R4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReasoningType {
    R1,
    R2,
    R3,
    R4,
}

impl ReasoningType {
    pub fn as_str(self) -> &'static str {
        match self {
            ReasoningType::R1 => "R1",
            ReasoningType::R2 => "R2",
            ReasoningType::R3 => "R3",
            ReasoningType::R4 => "R4",
        }
    }
}

/// One binary entailment example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvInstance {
    pub id: String,
    pub dataset: String,
    pub category: Category,
    pub premise: String,
    pub hypothesis: String,
    pub gold: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_type: Option<ReasoningType>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub source: BTreeMap<String, String>,
}

impl EvInstance {
    /// Checks the per-record invariants. Returns the offending field name.
    pub fn validate(&self) -> Result<(), DatasetError> {
        for (field, value) in [
            ("id", &self.id),
            ("premise", &self.premise),
            ("hypothesis", &self.hypothesis),
        ] {
            if value.trim().is_empty() {
                return Err(DatasetError::invalid(field, "must be non-empty"));
            }
        }
        Ok(())
    }
}

/// Checks record invariants plus id uniqueness across the collection.
pub fn validate_collection(instances: &[EvInstance]) -> Result<(), DatasetError> {
    let mut seen = HashSet::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        inst.validate().map_err(|e| e.at_line(i + 1))?;
        if !seen.insert(inst.id.as_str()) {
            return Err(DatasetError::invalid("id", format!("duplicate id {:?}", inst.id)).at_line(i + 1));
        }
    }
    Ok(())
}

/// Three-way NLI label. Accepts the common long spellings on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NliLabel {
    #[serde(alias = "entailment")]
    Entail,
    Neutral,
    #[serde(alias = "contradiction")]
    Contradict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliItem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    pub premise: String,
    pub hypothesis: String,
    pub label: NliLabel,
}

impl NliItem {
    pub fn validate(&self) -> Result<(), DatasetError> {
        non_empty("premise", &self.premise)?;
        non_empty("hypothesis", &self.hypothesis)
    }
}

/// Multiple-choice question over a context passage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaItem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    pub context: String,
    pub question: String,
    pub choices: Vec<String>,
    pub correct_index: usize,
}

impl QaItem {
    pub fn validate(&self) -> Result<(), DatasetError> {
        non_empty("context", &self.context)?;
        if self.choices.len() < 2 {
            return Err(DatasetError::invalid("choices", "need at least two choices"));
        }
        if self.correct_index >= self.choices.len() {
            return Err(DatasetError::invalid(
                "correct_index",
                format!("{} out of range for {} choices", self.correct_index, self.choices.len()),
            ));
        }
        let mut seen = HashSet::new();
        for choice in &self.choices {
            non_empty("choices", choice)?;
            if !seen.insert(choice.trim()) {
                return Err(DatasetError::invalid("choices", format!("duplicate choice {choice:?}")));
            }
        }
        Ok(())
    }
}

/// Which answer an explanation was written for (ECQA-style sources carry
/// explanations for every option).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplainedChoice {
    Correct,
    Incorrect,
}

/// Rationale record. Either `hypothesis` is given directly, or
/// `question` + `answer` are converted into one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationaleItem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    pub rationale: String,
    pub gold: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explains: Option<ExplainedChoice>,
}

impl RationaleItem {
    pub fn validate(&self) -> Result<(), DatasetError> {
        non_empty("rationale", &self.rationale)?;
        match (&self.hypothesis, &self.question, &self.answer) {
            (Some(h), _, _) => non_empty("hypothesis", h),
            (None, Some(q), Some(a)) => {
                non_empty("question", q)?;
                non_empty("answer", a)
            }
            _ => Err(DatasetError::invalid(
                "hypothesis",
                "need either hypothesis or question+answer",
            )),
        }
    }
}

/// Where the weaker hypothesis of a ranking pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    IncorrectOption,
    Generated,
}

/// Premise with a hypothesis it supports more strongly than a second one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankPair {
    pub premise: String,
    pub strong_hypothesis: String,
    pub weak_hypothesis: String,
    pub provenance: Provenance,
}

impl RankPair {
    pub fn validate(&self) -> Result<(), DatasetError> {
        non_empty("premise", &self.premise)?;
        non_empty("strong_hypothesis", &self.strong_hypothesis)?;
        non_empty("weak_hypothesis", &self.weak_hypothesis)?;
        if self.strong_hypothesis == self.weak_hypothesis {
            return Err(DatasetError::invalid(
                "weak_hypothesis",
                "must differ from strong_hypothesis",
            ));
        }
        Ok(())
    }
}

fn non_empty(field: &'static str, value: &str) -> Result<(), DatasetError> {
    if value.trim().is_empty() {
        Err(DatasetError::invalid(field, "must be non-empty"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qa(choices: &[&str], correct: usize) -> QaItem {
        QaItem {
            id: None,
            dataset: None,
            context: "ctx".into(),
            question: "q?".into(),
            choices: choices.iter().map(|s| s.to_string()).collect(),
            correct_index: correct,
        }
    }

    #[test]
    fn qa_rejects_duplicates_and_bad_index() {
        assert!(qa(&["a", "b"], 0).validate().is_ok());
        assert!(qa(&["a", "a"], 0).validate().is_err());
        assert!(qa(&["a", "b"], 2).validate().is_err());
        assert!(qa(&["a"], 0).validate().is_err());
    }

    #[test]
    fn labels_serialize_snake_case() {
        assert_eq!(serde_json::to_string(&Label::NotSupport).unwrap(), "\"not_support\"");
        assert_eq!(serde_json::to_string(&Category::ContextualQa).unwrap(), "\"contextual_qa\"");
        let l: NliLabel = serde_json::from_str("\"contradiction\"").unwrap();
        assert_eq!(l, NliLabel::Contradict);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let inst = EvInstance {
            id: "x".into(),
            dataset: "d".into(),
            category: Category::Nli,
            premise: "p".into(),
            hypothesis: "h".into(),
            gold: Label::Support,
            reasoning_type: None,
            source: BTreeMap::new(),
        };
        let err = validate_collection(&[inst.clone(), inst]).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
