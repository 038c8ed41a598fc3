//! Rule-based question + answer to declarative statement rewriting.
//!
//! The rewriter covers the common shapes of multiple-choice questions:
//! yes/no questions by subject–auxiliary inversion, wh-questions by moving the
//! answer into the gap, and fill-in-the-blank stems by substitution. Anything
//! else falls back to `The answer to '<question>' is <answer>.`, and the rule
//! that fired is reported so callers can flag it.

use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Which rewrite produced a statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementRule {
    YesNo,
    WhCopula,
    WhAuxiliary,
    WhSubject,
    WhClause,
    Blank,
    External,
    Fallback,
}

impl StatementRule {
    pub fn as_str(self) -> &'static str {
        match self {
            StatementRule::YesNo => "yes_no",
            StatementRule::WhCopula => "wh_copula",
            StatementRule::WhAuxiliary => "wh_auxiliary",
            StatementRule::WhSubject => "wh_subject",
            StatementRule::WhClause => "wh_clause",
            StatementRule::Blank => "blank",
            StatementRule::External => "external",
            StatementRule::Fallback => "fallback",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub text: String,
    pub rule: StatementRule,
}

/// Turns a (question, answer) pair into a hypothesis statement. Never fails:
/// implementations degrade to [`fallback_statement`].
pub trait StatementConverter: Send + Sync {
    fn convert(&self, question: &str, answer: &str) -> Statement;
}

/// The built-in rewriter.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleConverter;

impl StatementConverter for RuleConverter {
    fn convert(&self, question: &str, answer: &str) -> Statement {
        question_to_statement(question, answer)
    }
}

/// Rewrites with the built-in rules.
pub fn question_to_statement(question: &str, answer: &str) -> Statement {
    let answer = clean_answer(answer);
    let q = question.trim();
    match rewrite(q, answer) {
        Some((text, rule)) => Statement { text, rule },
        None => Statement {
            text: fallback_statement(question, answer),
            rule: StatementRule::Fallback,
        },
    }
}

pub fn fallback_statement(question: &str, answer: &str) -> String {
    format!("The answer to '{}' is {}.", question.trim(), clean_answer(answer))
}

const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "am", "do", "does", "did", "can", "could", "will", "would",
    "shall", "should", "may", "might", "must", "has", "have", "had",
];
const COPULAS: &[&str] = &["is", "are", "was", "were", "am"];
const WH_WORDS: &[&str] = &["what", "which", "who", "whom", "whose", "where", "when", "why", "how"];
const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
    "their", "some", "every", "each", "any", "no",
];
const PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "someone", "somebody", "people", "everyone",
    "everybody", "one",
];
const PREPOSITIONS: &[&str] = &[
    "in", "at", "on", "under", "near", "inside", "by", "from", "to", "into", "behind", "beside",
    "above", "below", "over", "outside", "with", "within", "around",
];
const REASON_MARKERS: &[&str] = &["because", "to", "so", "since", "as", "for"];

fn clean_answer(answer: &str) -> &str {
    answer.trim().trim_end_matches(['.', '!']).trim_end()
}

fn rewrite(q: &str, answer: &str) -> Option<(String, StatementRule)> {
    if q.is_empty() || answer.is_empty() {
        return None;
    }
    let body = q.trim_end_matches(|c: char| c == '?' || c.is_whitespace());
    if body.is_empty() || has_internal_sentence_break(body) {
        return None;
    }
    if body.contains('_') {
        return Some((finish(&substitute_blank(body, answer)), StatementRule::Blank));
    }

    let tokens: Vec<&str> = body.split_whitespace().collect();
    let first = tokens[0].to_lowercase();

    if AUXILIARIES.contains(&first.as_str()) {
        return yes_no(&first, &tokens[1..], answer);
    }
    if WH_WORDS.contains(&first.as_str()) {
        return wh_question(&first, &tokens, answer);
    }
    None
}

fn has_internal_sentence_break(body: &str) -> bool {
    [". ", "! ", "? "].iter().any(|sep| body.contains(sep))
}

fn substitute_blank(body: &str, answer: &str) -> String {
    let start = body.find('_').expect("caller checked");
    let end = body[start..]
        .find(|c: char| c != '_')
        .map_or(body.len(), |off| start + off);
    format!("{}{}{}", &body[..start], answer, &body[end..])
}

fn yes_no(aux: &str, rest: &[&str], answer: &str) -> Option<(String, StatementRule)> {
    let positive = match answer.to_lowercase().as_str() {
        "yes" | "true" | "correct" => true,
        "no" | "false" | "incorrect" => false,
        _ => return None,
    };
    let (subject, predicate) = split_subject(rest);
    if subject.is_empty() || predicate.is_empty() {
        return None;
    }
    let mut words: Vec<String> = subject.iter().map(|s| s.to_string()).collect();
    match (positive, aux) {
        (true, "do") => {}
        (true, _) => words.push(aux.to_string()),
        (false, "can") => words.push("cannot".to_string()),
        (false, _) => {
            words.push(aux.to_string());
            words.push("not".to_string());
        }
    }
    words.extend(predicate.iter().map(|s| s.to_string()));
    Some((finish(&words.join(" ")), StatementRule::YesNo))
}

fn wh_question(wh: &str, tokens: &[&str], answer: &str) -> Option<(String, StatementRule)> {
    let search_end = tokens.len().min(4);
    let aux_pos = (1..search_end).find(|&i| AUXILIARIES.contains(&tokens[i].to_lowercase().as_str()));

    let Some(i) = aux_pos else {
        // "Who wrote Hamlet?"
        if wh == "who" && tokens.len() >= 2 {
            let text = format!("{} {}", answer, tokens[1..].join(" "));
            return Some((finish(&text), StatementRule::WhSubject));
        }
        return None;
    };

    let head = &tokens[1..i];
    let aux = tokens[i].to_lowercase();
    let rest = &tokens[i + 1..];
    if rest.is_empty() {
        return None;
    }
    let copula = COPULAS.contains(&aux.as_str());

    if matches!(wh, "what" | "which" | "who" | "whom" | "whose") {
        if copula {
            let text = format!("{} {} {}", rest.join(" "), aux, answer);
            return Some((finish(&text), StatementRule::WhCopula));
        }
        if head.is_empty() && !is_subject_like(rest[0]) {
            // The wh-word is the subject: "What will happen next?"
            if answer.split_whitespace().count() >= 3 {
                return Some((finish(answer), StatementRule::WhClause));
            }
            let text = format!("{} {} {}", answer, aux, rest.join(" "));
            return Some((finish(&text), StatementRule::WhSubject));
        }
        let (subject, predicate) = split_subject(rest);
        let text = join_clause(subject, &aux, predicate, &[answer]);
        return Some((finish(&text), StatementRule::WhAuxiliary));
    }

    let (subject, predicate) = split_subject(rest);
    let text = match wh {
        "where" => {
            let filler = with_preposition(answer);
            join_clause(subject, &aux, predicate, &[filler.as_str()])
        }
        "when" => join_clause(subject, &aux, predicate, &[answer]),
        "why" => {
            let filler = reason_clause(answer);
            join_clause(subject, &aux, predicate, &[filler.as_str()])
        }
        "how" => {
            if !head.is_empty() {
                // "how many", "how long", ...: no gap to fill in place
                return None;
            }
            match predicate.split_first() {
                Some((verb, tail)) => {
                    let mut pred = vec![*verb, answer];
                    pred.extend_from_slice(tail);
                    join_clause(subject, &aux, &pred, &[])
                }
                None => join_clause(subject, &aux, &[], &[answer]),
            }
        }
        _ => return None,
    };
    Some((finish(&text), StatementRule::WhAuxiliary))
}

fn join_clause(subject: &[&str], aux: &str, predicate: &[&str], tail: &[&str]) -> String {
    let mut words: Vec<&str> = subject.to_vec();
    // bare "do" carries no tense or emphasis in a declarative
    if aux != "do" {
        words.push(aux);
    }
    words.extend_from_slice(predicate);
    words.extend_from_slice(tail);
    words.join(" ")
}

fn is_subject_like(token: &str) -> bool {
    let lower = token.to_lowercase();
    PRONOUNS.contains(&lower.as_str())
        || DETERMINERS.contains(&lower.as_str())
        || token.chars().next().is_some_and(char::is_uppercase)
}

/// Splits a clause after subject–auxiliary inversion into subject and predicate.
fn split_subject<'a, 'b>(rest: &'b [&'a str]) -> (&'b [&'a str], &'b [&'a str]) {
    let Some(first) = rest.first() else {
        return (rest, rest);
    };
    let lower = first.to_lowercase();
    let len = if DETERMINERS.contains(&lower.as_str()) {
        2.min(rest.len())
    } else if first.chars().next().is_some_and(char::is_uppercase) && *first != "I" {
        rest.iter()
            .take_while(|t| t.chars().next().is_some_and(char::is_uppercase))
            .count()
    } else {
        1
    };
    rest.split_at(len)
}

fn with_preposition(answer: &str) -> String {
    let first = answer.split_whitespace().next().unwrap_or("").to_lowercase();
    if PREPOSITIONS.contains(&first.as_str()) {
        answer.to_string()
    } else {
        format!("in {answer}")
    }
}

fn reason_clause(answer: &str) -> String {
    let first = answer.split_whitespace().next().unwrap_or("").to_lowercase();
    if REASON_MARKERS.contains(&first.as_str()) {
        answer.to_string()
    } else {
        format!("because {}", lowercase_first(answer))
    }
}

fn lowercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        // keep "I" and acronyms
        Some(c) if c.is_uppercase() && !chars.clone().next().is_some_and(char::is_uppercase) && c != 'I' => {
            c.to_lowercase().chain(chars).collect()
        }
        _ => s.to_string(),
    }
}

/// Collapses whitespace, drops spaces before punctuation, capitalizes and
/// terminates with a period.
fn finish(text: &str) -> String {
    let mut out = text.split_whitespace().collect::<Vec<_>>().join(" ");
    for p in [" .", " ,", " !", " ?"] {
        out = out.replace(p, &p[1..]);
    }
    let mut chars = out.chars();
    let mut out: String = match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => out,
    };
    if !out.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out
}

/// Converter backed by an HTTP endpoint that accepts `{"question", "answer"}`
/// and returns `{"statement"}`. Any failure degrades to the built-in rules.
#[derive(Debug, Clone)]
pub struct ExternalConverter {
    url: String,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct ConvertRequest<'a> {
    question: &'a str,
    answer: &'a str,
}

#[derive(Deserialize)]
struct ConvertResponse {
    statement: String,
}

impl ExternalConverter {
    pub fn new(url: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { url: url.into(), agent }
    }

    fn request(&self, question: &str, answer: &str) -> Result<String, ureq::Error> {
        let resp: ConvertResponse = self
            .agent
            .post(&self.url)
            .send_json(ConvertRequest { question, answer })?
            .body_mut()
            .read_json()?;
        Ok(resp.statement)
    }
}

impl StatementConverter for ExternalConverter {
    fn convert(&self, question: &str, answer: &str) -> Statement {
        match self.request(question, answer) {
            Ok(text) if !text.trim().is_empty() => Statement {
                text: text.trim().to_string(),
                rule: StatementRule::External,
            },
            Ok(_) => question_to_statement(question, answer),
            Err(err) => {
                log::warn!("external converter failed ({err}); using built-in rules");
                question_to_statement(question, answer)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(q: &str, a: &str) -> (String, StatementRule) {
        let s = question_to_statement(q, a);
        (s.text, s.rule)
    }

    #[test]
    fn wh_copula() {
        assert_eq!(conv("What color is the sky?", "blue"), ("The sky is blue.".into(), StatementRule::WhCopula));
    }

    #[test]
    fn yes_no_inversion() {
        assert_eq!(conv("Is water wet?", "Yes").0, "Water is wet.");
        assert_eq!(conv("Is water wet?", "No").0, "Water is not wet.");
        assert_eq!(conv("Can birds fly?", "no").0, "Birds cannot fly.");
        assert_eq!(conv("Do birds fly?", "yes").0, "Birds fly.");
    }

    #[test]
    fn empty_question_falls_back() {
        assert_eq!(conv("", "x"), ("The answer to '' is x.".into(), StatementRule::Fallback));
    }

    #[test]
    fn yes_no_form_with_content_answer_falls_back() {
        assert_eq!(conv("Is it red or blue?", "red").1, StatementRule::Fallback);
    }

    #[test]
    fn blank_substitution() {
        assert_eq!(
            conv("The author wrote this passage to _ .", "inform readers").0,
            "The author wrote this passage to inform readers."
        );
    }

    #[test]
    fn deterministic() {
        assert_eq!(conv("Where do you store a saw?", "toolbox"), conv("Where do you store a saw?", "toolbox"));
    }
}
