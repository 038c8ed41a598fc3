//! Ranking negatives: pairs of a supported hypothesis with a weaker one.

use super::statement::StatementConverter;
use super::types::{EvInstance, Label, Provenance, QaItem, RankPair};
use super::DatasetError;

/// Pairs the correct option's statement with each incorrect option's.
pub fn mine_negatives_from_options(
    item: &QaItem,
    converter: &dyn StatementConverter,
) -> Result<Vec<RankPair>, DatasetError> {
    item.validate()?;
    let strong = converter.convert(&item.question, &item.choices[item.correct_index]).text;
    let mut pairs = Vec::with_capacity(item.choices.len() - 1);
    for (i, choice) in item.choices.iter().enumerate() {
        if i == item.correct_index {
            continue;
        }
        let weak = converter.convert(&item.question, choice).text;
        if weak == strong {
            // distinct choices can still rewrite to the same sentence
            log::warn!("option {i} rewrites to the correct statement; pair skipped");
            continue;
        }
        pairs.push(RankPair {
            premise: item.context.clone(),
            strong_hypothesis: strong.clone(),
            weak_hypothesis: weak,
            provenance: Provenance::IncorrectOption,
        });
    }
    Ok(pairs)
}

/// Prompt asking a generator for five hypotheses the premise contradicts.
pub fn build_negative_generation_prompt(premise: &str, hypothesis: &str) -> String {
    format!(
        "For a given premise and a valid hypothesis, generate five alternate hypotheses \
         contradicted by the premise. Try to avoid using the negation words such as \"not\", \
         \"never\", etc. The output should be numbered from 1 to 5.\n\
         Premise: {premise}\n\
         Hypothesis: {hypothesis}"
    )
}

/// Items parsed out of a generator reply.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedNegatives {
    pub hypotheses: Vec<String>,
    /// Set when nothing could be parsed.
    pub diagnostic: Option<String>,
}

pub const MAX_GENERATED_NEGATIVES: usize = 5;

/// Extracts up to five numbered lines (`1.`, `2)`, `3:` or `4 -`), keeping
/// reply order and skipping anything else.
pub fn parse_generated_negatives(text: &str) -> ParsedNegatives {
    let hypotheses: Vec<String> = text
        .lines()
        .filter_map(parse_numbered_line)
        .take(MAX_GENERATED_NEGATIVES)
        .collect();
    let diagnostic = if hypotheses.is_empty() {
        Some(format!(
            "no numbered hypotheses found in {} line(s) of generator output",
            text.lines().count()
        ))
    } else {
        None
    };
    ParsedNegatives { hypotheses, diagnostic }
}

fn parse_numbered_line(line: &str) -> Option<String> {
    let line = line.trim();
    let digits = line.find(|c: char| !c.is_ascii_digit())?;
    if digits == 0 {
        return None;
    }
    let n: usize = line[..digits].parse().ok()?;
    if !(1..=MAX_GENERATED_NEGATIVES).contains(&n) {
        return None;
    }
    let rest = line[digits..].trim_start();
    let rest = rest.strip_prefix(['.', ')', ':', '-'])?;
    let item = rest.trim();
    if item.is_empty() {
        None
    } else {
        Some(item.to_string())
    }
}

/// Pairs an instance's hypothesis with each generated alternative. Only
/// support-labelled instances are eligible.
pub fn pairs_from_generated(instance: &EvInstance, generated: &[String]) -> Vec<RankPair> {
    if instance.gold != Label::Support {
        return Vec::new();
    }
    generated
        .iter()
        .filter(|g| **g != instance.hypothesis)
        .map(|g| RankPair {
            premise: instance.premise.clone(),
            strong_hypothesis: instance.hypothesis.clone(),
            weak_hypothesis: g.clone(),
            provenance: Provenance::Generated,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::statement::RuleConverter;

    fn qa(n: usize) -> QaItem {
        QaItem {
            id: None,
            dataset: None,
            context: "ctx".into(),
            question: "What color is the sky?".into(),
            choices: ["blue", "green", "red", "black", "white"][..n].iter().map(|s| s.to_string()).collect(),
            correct_index: 0,
        }
    }

    #[test]
    fn options_give_n_minus_one_pairs() {
        let pairs = mine_negatives_from_options(&qa(4), &RuleConverter).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|p| p.strong_hypothesis == "The sky is blue."));
        assert!(pairs.iter().all(|p| p.provenance == Provenance::IncorrectOption));
        assert!(pairs.iter().all(|p| p.strong_hypothesis != p.weak_hypothesis));
        assert_eq!(mine_negatives_from_options(&qa(2), &RuleConverter).unwrap().len(), 1);
    }

    #[test]
    fn prompt_is_stable_and_keeps_newlines() {
        let a = build_negative_generation_prompt("line one\nline two", "h");
        assert_eq!(a, build_negative_generation_prompt("line one\nline two", "h"));
        assert!(a.starts_with(
            "For a given premise and a valid hypothesis, generate five alternate hypotheses"
        ));
        assert!(a.contains("Premise: line one\nline two\nHypothesis: h"));
    }

    #[test]
    fn parse_numbering_styles() {
        assert_eq!(parse_generated_negatives("1. A\n2. B").hypotheses, vec!["A", "B"]);
        assert_eq!(parse_generated_negatives("1) A\n 2. B\nnoise").hypotheses, vec!["A", "B"]);
        let empty = parse_generated_negatives("");
        assert!(empty.hypotheses.is_empty());
        assert!(empty.diagnostic.is_some());
    }

    #[test]
    fn parse_caps_at_five_and_skips_out_of_range() {
        let text = "1. a\n2. b\n3. c\n4. d\n5. e\n6. f\n0. z\n";
        assert_eq!(parse_generated_negatives(text).hypotheses, vec!["a", "b", "c", "d", "e"]);
        assert!(parse_generated_negatives("1.\n2 -   \n").hypotheses.is_empty());
    }
}
