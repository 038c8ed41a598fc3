use std::collections::HashSet;

use crate::objectives::tokenize;
use crate::scoring::template::{HYPOTHESIS_SLOT, PREMISE_SLOT};
use crate::scoring::{MockBackend, PromptTemplate};

/// Recovers (premise, hypothesis) from the query part of a prompt rendered
/// with `template`.
pub fn split_rendered(template: &PromptTemplate, prompt: &str) -> Option<(String, String)> {
    let body = template.body();
    let (p, h) = (body.find(PREMISE_SLOT)?, body.find(HYPOTHESIS_SLOT)?);
    let (first, second, premise_first) = if p < h {
        (PREMISE_SLOT, HYPOTHESIS_SLOT, true)
    } else {
        (HYPOTHESIS_SLOT, PREMISE_SLOT, false)
    };
    let (prefix, rest) = body.split_once(first)?;
    let (middle, suffix) = rest.split_once(second)?;
    let q = prompt.strip_suffix(suffix)?;
    let cut = q.rfind(middle)?;
    let second_val = &q[cut + middle.len()..];
    let head = &q[..cut];
    let first_val = if prefix.is_empty() {
        head
    } else {
        &head[head.rfind(prefix)? + prefix.len()..]
    };
    let (premise, hypothesis) = if premise_first {
        (first_val, second_val)
    } else {
        (second_val, first_val)
    };
    Some((premise.to_string(), hypothesis.to_string()))
}

/// Fraction of hypothesis tokens that occur in the premise.
pub fn overlap(premise: &str, hypothesis: &str) -> f64 {
    let p: HashSet<String> = tokenize(premise).into_iter().collect();
    let h = tokenize(hypothesis);
    if h.is_empty() {
        return 0.0;
    }
    h.iter().filter(|t| p.contains(*t)).count() as f64 / h.len() as f64
}

/// Offline backend: P(Yes) grows linearly with lexical overlap between
/// premise and hypothesis.
pub fn overlap_backend(template: PromptTemplate) -> MockBackend {
    MockBackend::token_probs("mock:overlap", move |prompt| match split_rendered(&template, prompt) {
        Some((p, h)) => {
            let f = overlap(&p, &h);
            (0.05 + 0.9 * f, 0.95 - 0.9 * f)
        }
        None => (0.5, 0.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use crate::scoring::Demo;

    #[test]
    fn round_trips_every_builtin_variant() {
        for name in ["P1", "P2", "P3", "P4", "P5"] {
            let t = PromptTemplate::variant(name).unwrap();
            let rendered = t.render("The cat sat.", "A cat sat.");
            assert_eq!(
                split_rendered(&t, &rendered),
                Some(("The cat sat.".to_string(), "A cat sat.".to_string())),
                "{name}"
            );
        }
        let demo = Demo {
            premise: "x".into(),
            hypothesis: "y".into(),
            answer: Label::Support,
        };
        let t = PromptTemplate::default_template().with_demos(vec![demo]);
        let (p, h) = split_rendered(&t, &t.render("real premise", "real hyp")).unwrap();
        assert_eq!((p.as_str(), h.as_str()), ("real premise", "real hyp"));
    }

    #[test]
    fn overlap_fraction() {
        assert_eq!(overlap("the red box", "The box is red"), 0.75);
        assert_eq!(overlap("a", ""), 0.0);
    }
}
