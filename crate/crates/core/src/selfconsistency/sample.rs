use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::SelfConsistencyError;
use crate::dataset::{DatasetError, Record, StatementConverter};
use crate::scoring::EntailmentScore;

/// One sampled chain-of-thought rationale and the answer it arrived at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotSample {
    pub question_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<String>,
    pub question: String,
    pub choices: Vec<String>,
    pub rationale: String,
    pub predicted_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<EntailmentScore>,
}

impl CotSample {
    /// `sample_id` if set, otherwise `<question_id>#<index>`.
    pub fn id_or(&self, index: usize) -> String {
        self.sample_id.clone().unwrap_or_else(|| format!("{}#{index}", self.question_id))
    }
}

impl Record for CotSample {
    fn validate(&self) -> Result<(), DatasetError> {
        for (field, value) in [
            ("question_id", &self.question_id),
            ("question", &self.question),
            ("rationale", &self.rationale),
        ] {
            if value.trim().is_empty() {
                return Err(DatasetError::invalid(field, "must be non-empty"));
            }
        }
        if !self.choices.contains(&self.predicted_answer) {
            return Err(DatasetError::invalid(
                "predicted_answer",
                format!("{:?} is not one of the choices", self.predicted_answer),
            ));
        }
        if let Some(gold) = &self.gold_answer {
            if !self.choices.contains(gold) {
                return Err(DatasetError::invalid("gold_answer", format!("{gold:?} is not one of the choices")));
            }
        }
        Ok(())
    }
}

/// All samples for one question, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionGroup {
    pub question_id: String,
    pub question: String,
    pub gold_answer: Option<String>,
    pub samples: Vec<CotSample>,
}

/// Groups samples by question id in order of first appearance. Samples of a
/// question must agree on the question text and gold answer.
pub fn group_samples(samples: Vec<CotSample>) -> Result<Vec<QuestionGroup>, SelfConsistencyError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<QuestionGroup> = Vec::new();
    for s in samples {
        s.validate().map_err(|e| SelfConsistencyError::Invalid(format!("sample of {}: {e}", s.question_id)))?;
        match index.get(&s.question_id) {
            Some(&i) => {
                let g = &mut groups[i];
                if g.question != s.question || g.gold_answer != s.gold_answer {
                    return Err(SelfConsistencyError::Invalid(format!(
                        "samples of {} disagree on question text or gold answer",
                        s.question_id
                    )));
                }
                g.samples.push(s);
            }
            None => {
                index.insert(s.question_id.clone(), groups.len());
                groups.push(QuestionGroup {
                    question_id: s.question_id.clone(),
                    question: s.question.clone(),
                    gold_answer: s.gold_answer.clone(),
                    samples: vec![s],
                });
            }
        }
    }
    Ok(groups)
}

/// Statement form of (question, predicted answer), converted once per
/// distinct pair.
pub struct HypothesisCache<'a> {
    converter: &'a dyn StatementConverter,
    map: HashMap<(String, String), String>,
    conversions: usize,
}

impl<'a> HypothesisCache<'a> {
    pub fn new(converter: &'a dyn StatementConverter) -> Self {
        Self {
            converter,
            map: HashMap::new(),
            conversions: 0,
        }
    }

    pub fn hypothesis(&mut self, question: &str, answer: &str) -> String {
        let key = (question.to_string(), answer.to_string());
        if let Some(h) = self.map.get(&key) {
            return h.clone();
        }
        self.conversions += 1;
        let h = self.converter.convert(question, answer).text;
        self.map.insert(key, h.clone());
        h
    }

    /// Number of converter invocations so far.
    pub fn conversions(&self) -> usize {
        self.conversions
    }
}

pub fn hypothesis_for_sample(sample: &CotSample, converter: &dyn StatementConverter) -> String {
    converter.convert(&sample.question, &sample.predicted_answer).text
}
