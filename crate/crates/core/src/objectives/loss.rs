use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{SparseVec, TinyScorer};
use crate::dataset::Label;

pub const LOSS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Classification,
    Ranking,
}

/// Sign convention of the margin ranking hinge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RankingOrientation {
    /// max(0, m − (s_strong − s_weak)): zero once the stronger hypothesis
    /// leads by the margin.
    #[default]
    Intent,
    /// max(0, s_strong − s_weak + m), the sign as printed in the original
    /// formulation. It rewards ranking the weaker hypothesis higher.
    PaperLiteral,
}

impl RankingOrientation {
    /// Argument of the hinge.
    pub fn hinge_arg(self, s_strong: f64, s_weak: f64, margin: f64) -> f64 {
        match self {
            RankingOrientation::Intent => margin - (s_strong - s_weak),
            RankingOrientation::PaperLiteral => s_strong - s_weak + margin,
        }
    }

    /// d(arg)/d(s_strong); d(arg)/d(s_weak) is its negation.
    fn strong_sign(self) -> f64 {
        match self {
            RankingOrientation::Intent => -1.0,
            RankingOrientation::PaperLiteral => 1.0,
        }
    }
}

/// Cross-entropy of the Yes-probability against the gold label, with the
/// score clamped to [1e-12, 1 − 1e-12].
pub fn classification_loss(score: f64, gold: Label) -> f64 {
    let s = score.clamp(LOSS_EPS, 1.0 - LOSS_EPS);
    match gold {
        Label::Support => -s.ln(),
        Label::NotSupport => -(1.0 - s).ln(),
    }
}

pub fn ranking_loss(s_strong: f64, s_weak: f64, margin: f64) -> f64 {
    ranking_loss_with(s_strong, s_weak, margin, RankingOrientation::Intent)
}

pub fn ranking_loss_with(s_strong: f64, s_weak: f64, margin: f64, orientation: RankingOrientation) -> f64 {
    orientation.hinge_arg(s_strong, s_weak, margin).max(0.0)
}

/// Featurized training example.
#[derive(Debug, Clone, PartialEq)]
pub enum Example {
    Labeled { x: SparseVec, gold: Label },
    Pair { strong: SparseVec, weak: SparseVec },
}

impl Example {
    pub fn objective(&self) -> Objective {
        match self {
            Example::Labeled { .. } => Objective::Classification,
            Example::Pair { .. } => Objective::Ranking,
        }
    }
}

/// Gradient of the mean batch loss; weight entries absent from the map are 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradient {
    pub weights: BTreeMap<u32, f64>,
    pub bias: f64,
}

impl Gradient {
    fn add(&mut self, x: &SparseVec, coef: f64) {
        for &(i, v) in x {
            *self.weights.entry(i).or_insert(0.0) += coef * v;
        }
        self.bias += coef;
    }

    fn scale(&mut self, k: f64) {
        for v in self.weights.values_mut() {
            *v *= k;
        }
        self.bias *= k;
    }

    /// Dense layout matching [`TinyScorer::params`].
    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim + 1];
        for (&i, &g) in &self.weights {
            v[i as usize] = g;
        }
        v[dim] = self.bias;
        v
    }

    pub fn is_zero(&self) -> bool {
        self.bias == 0.0 && self.weights.values().all(|&v| v == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSettings {
    pub margin: f64,
    pub orientation: RankingOrientation,
}

impl Default for LossSettings {
    fn default() -> Self {
        Self {
            margin: 0.2,
            orientation: RankingOrientation::Intent,
        }
    }
}

fn example_loss(scorer: &TinyScorer, ex: &Example, settings: LossSettings) -> f64 {
    match ex {
        Example::Labeled { x, gold } => classification_loss(scorer.score_features(x), *gold),
        Example::Pair { strong, weak } => ranking_loss_with(
            scorer.score_features(strong),
            scorer.score_features(weak),
            settings.margin,
            settings.orientation,
        ),
    }
}

/// Mean loss over the batch.
pub fn batch_loss(scorer: &TinyScorer, batch: &[Example], settings: LossSettings) -> f64 {
    assert!(!batch.is_empty(), "empty batch");
    batch.iter().map(|ex| example_loss(scorer, ex, settings)).sum::<f64>() / batch.len() as f64
}

/// Exact gradient of [`batch_loss`]. The hinge contributes only when its
/// argument is strictly positive, and a clamped score contributes nothing.
pub fn gradient(scorer: &TinyScorer, batch: &[Example], settings: LossSettings) -> Gradient {
    assert!(!batch.is_empty(), "empty batch");
    let mut g = Gradient::default();
    for ex in batch {
        match ex {
            Example::Labeled { x, gold } => {
                let s = scorer.score_features(x);
                if !(LOSS_EPS..=1.0 - LOSS_EPS).contains(&s) {
                    continue;
                }
                let y = if *gold == Label::Support { 1.0 } else { 0.0 };
                g.add(x, s - y);
            }
            Example::Pair { strong, weak } => {
                let ss = scorer.score_features(strong);
                let sw = scorer.score_features(weak);
                if settings.orientation.hinge_arg(ss, sw, settings.margin) <= 0.0 {
                    continue;
                }
                let sign = settings.orientation.strong_sign();
                g.add(strong, sign * ss * (1.0 - ss));
                g.add(weak, -sign * sw * (1.0 - sw));
            }
        }
    }
    g.scale(1.0 / batch.len() as f64);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::model::Featurizer;

    #[test]
    fn classification_values() {
        assert!((classification_loss(0.5, Label::Support) - 2f64.ln()).abs() < 1e-15);
        assert!((classification_loss(0.9, Label::Support) - 0.105_360_515_657_826_3).abs() < 1e-12);
        assert!((classification_loss(0.9, Label::NotSupport) - 2.302_585_092_994_045_6).abs() < 1e-9);
        assert!(classification_loss(1.0, Label::NotSupport).is_finite());
        assert!(classification_loss(0.0, Label::Support).is_finite());
    }

    #[test]
    fn ranking_values() {
        assert_eq!(ranking_loss(0.9, 0.3, 0.2), 0.0);
        assert!((ranking_loss(0.5, 0.6, 0.2) - 0.3).abs() < 1e-12);
        assert_eq!(ranking_loss(0.6, 0.6, 0.0), 0.0);
        assert!(
            (ranking_loss_with(0.9, 0.3, 0.2, RankingOrientation::PaperLiteral) - 0.8).abs() < 1e-12
        );
    }

    #[test]
    fn satisfied_ranking_batch_has_zero_gradient() {
        let f = Featurizer::new(1 << 12, 1);
        let mut scorer = TinyScorer::zeros(f);
        let strong = f.featurize("a b", "a");
        let weak = f.featurize("a b", "c");
        for &(i, _) in &strong {
            if !weak.iter().any(|&(j, _)| j == i) {
                scorer.weights[i as usize] += 2.0;
            }
        }
        let batch = vec![Example::Pair { strong, weak }];
        assert_eq!(batch_loss(&scorer, &batch, LossSettings::default()), 0.0);
        assert!(gradient(&scorer, &batch, LossSettings::default()).is_zero());
    }

    #[test]
    fn balanced_batch_has_zero_bias_gradient() {
        let f = Featurizer::new(64, 1);
        let scorer = TinyScorer::zeros(f);
        let batch = vec![
            Example::Labeled { x: f.featurize("a", "b"), gold: Label::Support },
            Example::Labeled { x: f.featurize("c", "d"), gold: Label::NotSupport },
        ];
        assert_eq!(gradient(&scorer, &batch, LossSettings::default()).bias, 0.0);
    }
}
