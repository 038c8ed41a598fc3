use std::collections::BTreeMap;

use super::statement::{StatementConverter, StatementRule};
use super::types::{Category, EvInstance, ExplainedChoice, Label, NliItem, NliLabel, QaItem, RationaleItem};
use super::DatasetError;

/// Metadata key recording which rewrite rule produced a hypothesis.
pub const CONVERTER_RULE_KEY: &str = "converter_rule";
/// Metadata key marking QA-derived instances as the correct or an incorrect option.
pub const OPTION_ROLE_KEY: &str = "option_role";

/// NLI to binary: entail is support, neutral and contradict are not.
pub fn convert_nli(item: &NliItem, id_seed: &str) -> Result<EvInstance, DatasetError> {
    item.validate()?;
    let gold = match item.label {
        NliLabel::Entail => Label::Support,
        NliLabel::Neutral | NliLabel::Contradict => Label::NotSupport,
    };
    Ok(EvInstance {
        id: item.id.clone().unwrap_or_else(|| id_seed.to_string()),
        dataset: dataset_name(&item.dataset, Category::Nli),
        category: Category::Nli,
        premise: item.premise.clone(),
        hypothesis: item.hypothesis.clone(),
        gold,
        reasoning_type: None,
        source: BTreeMap::new(),
    })
}

/// One instance per choice, with the context as premise. Only the correct
/// choice is labelled support.
pub fn convert_qa(
    item: &QaItem,
    id_seed: &str,
    converter: &dyn StatementConverter,
) -> Result<Vec<EvInstance>, DatasetError> {
    item.validate()?;
    let base_id = item.id.clone().unwrap_or_else(|| id_seed.to_string());
    let dataset = dataset_name(&item.dataset, Category::ContextualQa);
    let instances = item
        .choices
        .iter()
        .enumerate()
        .map(|(i, choice)| {
            let statement = converter.convert(&item.question, choice);
            let correct = i == item.correct_index;
            let mut source = BTreeMap::new();
            source.insert("question".to_string(), item.question.clone());
            source.insert("choice_index".to_string(), i.to_string());
            source.insert(
                OPTION_ROLE_KEY.to_string(),
                if correct { "correct" } else { "incorrect" }.to_string(),
            );
            source.insert(CONVERTER_RULE_KEY.to_string(), statement.rule.as_str().to_string());
            EvInstance {
                id: format!("{base_id}-{i}"),
                dataset: dataset.clone(),
                category: Category::ContextualQa,
                premise: item.context.clone(),
                hypothesis: statement.text,
                gold: if correct { Label::Support } else { Label::NotSupport },
                reasoning_type: None,
                source,
            }
        })
        .collect();
    Ok(instances)
}

/// Rationale as premise. Returns `Ok(None)` for explanations written for an
/// incorrect choice, which are not ingested.
pub fn convert_rationale(
    item: &RationaleItem,
    id_seed: &str,
    converter: &dyn StatementConverter,
) -> Result<Option<EvInstance>, DatasetError> {
    item.validate()?;
    if item.explains == Some(ExplainedChoice::Incorrect) {
        return Ok(None);
    }
    let mut source = BTreeMap::new();
    let hypothesis = match (&item.hypothesis, &item.question, &item.answer) {
        (Some(h), _, _) => h.clone(),
        (None, Some(q), Some(a)) => {
            let statement = converter.convert(q, a);
            source.insert("question".to_string(), q.clone());
            source.insert(CONVERTER_RULE_KEY.to_string(), statement.rule.as_str().to_string());
            statement.text
        }
        _ => unreachable!("validated"),
    };
    Ok(Some(EvInstance {
        id: item.id.clone().unwrap_or_else(|| id_seed.to_string()),
        dataset: dataset_name(&item.dataset, Category::Rationale),
        category: Category::Rationale,
        premise: item.rationale.clone(),
        hypothesis,
        gold: item.gold,
        reasoning_type: None,
        source,
    }))
}

/// Outcome of converting a whole source file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConversionReport {
    pub instances: Vec<EvInstance>,
    /// Explanations of incorrect choices that were dropped.
    pub skipped_incorrect_explanations: usize,
    /// Hypotheses produced by the fallback template.
    pub fallback_statements: usize,
}

impl ConversionReport {
    fn push(&mut self, inst: EvInstance) {
        if inst.source.get(CONVERTER_RULE_KEY).map(String::as_str) == Some(StatementRule::Fallback.as_str()) {
            self.fallback_statements += 1;
        }
        self.instances.push(inst);
    }
}

/// Row ids default to `<prefix>-<row>` when the record has none.
pub fn convert_nli_items(items: &[NliItem], prefix: &str) -> Result<ConversionReport, DatasetError> {
    let mut report = ConversionReport::default();
    for (row, item) in items.iter().enumerate() {
        let inst = convert_nli(item, &format!("{prefix}-{row}")).map_err(|e| e.at_line(row + 1))?;
        report.push(inst);
    }
    Ok(report)
}

pub fn convert_qa_items(
    items: &[QaItem],
    prefix: &str,
    converter: &dyn StatementConverter,
) -> Result<ConversionReport, DatasetError> {
    let mut report = ConversionReport::default();
    for (row, item) in items.iter().enumerate() {
        for inst in convert_qa(item, &format!("{prefix}-{row}"), converter).map_err(|e| e.at_line(row + 1))? {
            report.push(inst);
        }
    }
    Ok(report)
}

pub fn convert_rationale_items(
    items: &[RationaleItem],
    prefix: &str,
    converter: &dyn StatementConverter,
) -> Result<ConversionReport, DatasetError> {
    let mut report = ConversionReport::default();
    for (row, item) in items.iter().enumerate() {
        match convert_rationale(item, &format!("{prefix}-{row}"), converter).map_err(|e| e.at_line(row + 1))? {
            Some(inst) => report.push(inst),
            None => report.skipped_incorrect_explanations += 1,
        }
    }
    if report.skipped_incorrect_explanations > 0 {
        log::warn!(
            "skipped {} explanations written for incorrect choices",
            report.skipped_incorrect_explanations
        );
    }
    Ok(report)
}

fn dataset_name(name: &Option<String>, category: Category) -> String {
    name.clone().unwrap_or_else(|| category.as_str().to_string())
}
