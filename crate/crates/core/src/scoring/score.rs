use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::dataset::Label;

/// What to do when a generated label matches neither alias set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnmatchedPolicy {
    /// Seeded coin flip.
    #[default]
    Random,
    NotSupport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    /// Scores strictly above the threshold are support.
    pub threshold: f64,
    /// Treat a score exactly at the threshold as support.
    pub support_on_tie: bool,
    pub yes_aliases: BTreeSet<String>,
    pub no_aliases: BTreeSet<String>,
    /// Both probabilities below this are raised to it.
    pub prob_floor: f64,
    pub unmatched: UnmatchedPolicy,
    pub rng_seed: u64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            support_on_tie: false,
            yes_aliases: ["Yes".to_string()].into(),
            no_aliases: ["No".to_string()].into(),
            prob_floor: 1e-10,
            unmatched: UnmatchedPolicy::Random,
            rng_seed: 0,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ScoringError> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ScoringError::Config(format!("threshold {} not in (0, 1)", self.threshold)));
        }
        if self.yes_aliases.is_empty() || self.no_aliases.is_empty() {
            return Err(ScoringError::Config("alias sets must be non-empty".into()));
        }
        if let Some(shared) = self.yes_aliases.intersection(&self.no_aliases).next() {
            return Err(ScoringError::Config(format!("alias {shared:?} is in both sets")));
        }
        if !(self.prob_floor > 0.0 && self.prob_floor.is_finite()) {
            return Err(ScoringError::Config("prob_floor must be positive".into()));
        }
        Ok(())
    }
}

/// P(Yes) / (P(Yes) + P(No)). When both are below the floor they are both
/// replaced by it, so the degenerate case is exactly 0.5.
pub fn entailment_score(prob_yes: f64, prob_no: f64, cfg: &ScoringConfig) -> Result<f64, ScoringError> {
    if !(prob_yes >= 0.0 && prob_no >= 0.0) || !prob_yes.is_finite() || !prob_no.is_finite() {
        return Err(ScoringError::Domain(format!(
            "probabilities must be finite and non-negative, got ({prob_yes}, {prob_no})"
        )));
    }
    let (y, n) = if prob_yes < cfg.prob_floor && prob_no < cfg.prob_floor {
        (cfg.prob_floor, cfg.prob_floor)
    } else {
        (prob_yes, prob_no)
    };
    Ok(y / (y + n))
}

pub fn classify(score: f64, cfg: &ScoringConfig) -> Label {
    if score > cfg.threshold || (cfg.support_on_tie && score == cfg.threshold) {
        Label::Support
    } else {
        Label::NotSupport
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratedLabel {
    pub label: Label,
    /// False when the first token matched neither alias set.
    pub matched: bool,
}

/// First whitespace-delimited token of `text` with surrounding ASCII
/// punctuation removed.
pub fn first_token(text: &str) -> &str {
    text.split_whitespace()
        .next()
        .unwrap_or("")
        .trim_matches(|c: char| c.is_ascii_punctuation())
}

/// Label from generated text: case-sensitive alias match on the first token,
/// otherwise [`UnmatchedPolicy`].
pub fn label_from_generation<R: Rng + ?Sized>(text: &str, cfg: &ScoringConfig, rng: &mut R) -> GeneratedLabel {
    let token = first_token(text);
    if cfg.yes_aliases.contains(token) {
        return GeneratedLabel { label: Label::Support, matched: true };
    }
    if cfg.no_aliases.contains(token) {
        return GeneratedLabel { label: Label::NotSupport, matched: true };
    }
    let label = match cfg.unmatched {
        UnmatchedPolicy::Random => {
            if rng.random_bool(0.5) {
                Label::Support
            } else {
                Label::NotSupport
            }
        }
        UnmatchedPolicy::NotSupport => Label::NotSupport,
    };
    GeneratedLabel { label, matched: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> ScoringConfig {
        ScoringConfig::default()
    }

    #[test]
    fn score_examples() {
        assert_eq!(entailment_score(0.3, 0.3, &cfg()).unwrap(), 0.5);
        assert!((entailment_score(0.08, 0.02, &cfg()).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(entailment_score(0.0, 0.0, &cfg()).unwrap(), 0.5);
        assert_eq!(entailment_score(0.9, 0.0, &cfg()).unwrap(), 1.0);
        assert!(entailment_score(-0.1, 0.2, &cfg()).is_err());
        assert!(entailment_score(f64::NAN, 0.2, &cfg()).is_err());
    }

    #[test]
    fn classify_is_strict() {
        assert_eq!(classify(0.8, &cfg()), Label::Support);
        assert_eq!(classify(0.5, &cfg()), Label::NotSupport);
        assert_eq!(classify(0.2, &cfg()), Label::NotSupport);
        let tie = ScoringConfig { support_on_tie: true, ..cfg() };
        assert_eq!(classify(0.5, &tie), Label::Support);
    }

    #[test]
    fn generation_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(label_from_generation("Yes", &cfg(), &mut rng), GeneratedLabel { label: Label::Support, matched: true });
        assert_eq!(
            label_from_generation("No, because the premise says otherwise", &cfg(), &mut rng).label,
            Label::NotSupport
        );
        assert_eq!(label_from_generation("  Yes.", &cfg(), &mut rng).label, Label::Support);
        assert!(!label_from_generation("yes", &cfg(), &mut rng).matched);
        let maybe = label_from_generation("Maybe", &cfg(), &mut ChaCha8Rng::seed_from_u64(7));
        assert!(!maybe.matched);
        assert_eq!(maybe, label_from_generation("Maybe", &cfg(), &mut ChaCha8Rng::seed_from_u64(7)));
        let strict = ScoringConfig { unmatched: UnmatchedPolicy::NotSupport, ..cfg() };
        assert_eq!(label_from_generation("Maybe", &strict, &mut rng).label, Label::NotSupport);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let mut bad = cfg();
        bad.no_aliases.insert("Yes".into());
        assert!(bad.validate().is_err());
        assert!(ScoringConfig { threshold: 1.0, ..cfg() }.validate().is_err());
    }
}
