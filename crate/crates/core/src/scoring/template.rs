use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::dataset::Label;

pub const PREMISE_SLOT: &str = "{premise}";
pub const HYPOTHESIS_SLOT: &str = "{hypothesis}";

/// Default prompt: premise, hypothesis, and a Yes/No question.
pub const DEFAULT_BODY: &str =
    "Premise: {premise}\nHypothesis: {hypothesis}\nQuestion: Given the premise, is the hypothesis correct?\nAnswer:";

/// Prompt variants used for sensitivity checks. All keep premise before
/// hypothesis and expect a Yes/No continuation.
pub const VARIANTS: &[(&str, &str)] = &[
    ("P1", DEFAULT_BODY),
    (
        "P2",
        "Premise: {premise}\nHypothesis: {hypothesis}\nQuestion: Does the premise support the hypothesis?\nAnswer:",
    ),
    (
        "P3",
        "{premise}\nQuestion: Based on the passage above, is it true that \"{hypothesis}\"? Answer Yes or No.\nAnswer:",
    ),
    (
        "P4",
        "Context: {premise}\nClaim: {hypothesis}\nQuestion: Is the claim supported by the context?\nAnswer:",
    ),
    (
        "P5",
        "Read the premise and decide whether the hypothesis follows from it.\nPremise: {premise}\nHypothesis: {hypothesis}\nAnswer (Yes or No):",
    ),
];

/// A worked example prepended to the query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demo {
    pub premise: String,
    pub hypothesis: String,
    pub answer: Label,
}

/// Prompt body with `{premise}` and `{hypothesis}` slots plus optional
/// few-shot demonstrations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTemplate")]
pub struct PromptTemplate {
    name: String,
    body: String,
    #[serde(default)]
    demos: Vec<Demo>,
}

#[derive(Deserialize)]
struct RawTemplate {
    name: String,
    body: String,
    #[serde(default)]
    demos: Vec<Demo>,
}

impl TryFrom<RawTemplate> for PromptTemplate {
    type Error = ScoringError;

    fn try_from(raw: RawTemplate) -> Result<Self, Self::Error> {
        Ok(PromptTemplate::new(raw.name, raw.body)?.with_demos(raw.demos))
    }
}

impl PromptTemplate {
    /// Each slot must appear exactly once.
    pub fn new(name: impl Into<String>, body: impl Into<String>) -> Result<Self, ScoringError> {
        let name = name.into();
        let body = body.into();
        for slot in [PREMISE_SLOT, HYPOTHESIS_SLOT] {
            let count = body.matches(slot).count();
            if count != 1 {
                return Err(ScoringError::Template(format!(
                    "template {name:?} must contain {slot} exactly once (found {count})"
                )));
            }
        }
        Ok(Self { name, body, demos: Vec::new() })
    }

    pub fn default_template() -> Self {
        Self::new("P1", DEFAULT_BODY).expect("default body has both slots")
    }

    /// Looks up one of the built-in [`VARIANTS`].
    pub fn variant(name: &str) -> Option<Self> {
        VARIANTS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, body)| Self::new(*n, *body).expect("built-in variants are valid"))
    }

    pub fn with_demos(mut self, demos: Vec<Demo>) -> Self {
        self.demos = demos;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn demos(&self) -> &[Demo] {
        &self.demos
    }

    /// Demonstrations come first, each completed with its gold answer and
    /// separated from the next block by a blank line.
    pub fn render(&self, premise: &str, hypothesis: &str) -> String {
        let mut blocks: Vec<String> = self
            .demos
            .iter()
            .map(|d| {
                let answer = match d.answer {
                    Label::Support => "Yes",
                    Label::NotSupport => "No",
                };
                format!("{} {}", self.fill(&d.premise, &d.hypothesis), answer)
            })
            .collect();
        blocks.push(self.fill(premise, hypothesis));
        blocks.join("\n\n")
    }

    fn fill(&self, premise: &str, hypothesis: &str) -> String {
        // split on the slots rather than chained replace so slot-like text in
        // the premise is never re-substituted
        let (before_p, after_p) = self.body.split_once(PREMISE_SLOT).expect("validated");
        let mut out = String::with_capacity(self.body.len() + premise.len() + hypothesis.len());
        if let Some((a, b)) = before_p.split_once(HYPOTHESIS_SLOT) {
            out.push_str(a);
            out.push_str(hypothesis);
            out.push_str(b);
            out.push_str(premise);
            out.push_str(after_p);
        } else {
            let (a, b) = after_p.split_once(HYPOTHESIS_SLOT).expect("validated");
            out.push_str(before_p);
            out.push_str(premise);
            out.push_str(a);
            out.push_str(hypothesis);
            out.push_str(b);
        }
        out
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::default_template()
    }
}
