use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::dataset::Label;

/// How a class that is never predicted enters the macro average.
///
/// The default skips it: its precision is undefined, so it contributes
/// nothing. Under this rule the constant majority predictor scores 0.67 on a
/// balanced set (precision 0.5, recall 1.0 for the predicted class) and 1.0
/// on a single-class set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AbsentClassPolicy {
    #[default]
    SkipUnpredicted,
    /// Every class present in predictions or golds counts, F1 = 0 when
    /// undefined (scikit-learn's `zero_division=0`).
    ZeroUnionClasses,
}

/// Per-class counts and rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub label: Label,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    /// None when the class is never predicted.
    pub precision: Option<f64>,
    /// None when the class never occurs in the golds.
    pub recall: Option<f64>,
    /// 2TP / (2TP + FP + FN); 0 when the class is absent from both sides.
    pub f1: f64,
    /// Whether this class entered the macro average.
    pub in_macro: bool,
}

impl ClassStats {
    pub fn predicted(&self) -> usize {
        self.true_pos + self.false_pos
    }

    pub fn support(&self) -> usize {
        self.true_pos + self.false_neg
    }
}

pub fn class_stats(
    predictions: &[Label],
    golds: &[Label],
    policy: AbsentClassPolicy,
) -> Result<Vec<ClassStats>, MetricsError> {
    if predictions.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    if golds.is_empty() {
        return Err(MetricsError::Empty("predictions"));
    }
    Ok(Label::ALL
        .iter()
        .map(|&label| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for (&p, &g) in predictions.iter().zip(golds) {
                match (p == label, g == label) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
            let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
            let denom = 2 * tp + fp + fn_;
            let f1 = if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
            let in_macro = match policy {
                AbsentClassPolicy::SkipUnpredicted => tp + fp > 0,
                AbsentClassPolicy::ZeroUnionClasses => denom > 0,
            };
            ClassStats {
                label,
                true_pos: tp,
                false_pos: fp,
                false_neg: fn_,
                precision,
                recall,
                f1,
                in_macro,
            }
        })
        .collect())
}

/// Unweighted mean of per-class F1 over the classes selected by `policy`.
pub fn macro_f1_with(predictions: &[Label], golds: &[Label], policy: AbsentClassPolicy) -> Result<f64, MetricsError> {
    let stats = class_stats(predictions, golds, policy)?;
    Ok(mean_in_macro(&stats))
}

pub(crate) fn mean_in_macro(stats: &[ClassStats]) -> f64 {
    let counted: Vec<f64> = stats.iter().filter(|s| s.in_macro).map(|s| s.f1).collect();
    // non-empty inputs always predict at least one class
    counted.iter().sum::<f64>() / counted.len() as f64
}

/// Macro-F1 with the default [`AbsentClassPolicy`].
pub fn macro_f1(predictions: &[Label], golds: &[Label]) -> Result<f64, MetricsError> {
    macro_f1_with(predictions, golds, AbsentClassPolicy::default())
}

/// The most frequent gold label (ties go to support).
pub fn majority_label(golds: &[Label]) -> Label {
    let support = golds.iter().filter(|&&g| g == Label::Support).count();
    if support * 2 >= golds.len() {
        Label::Support
    } else {
        Label::NotSupport
    }
}

/// Macro-F1 of always predicting the most frequent gold label.
pub fn majority_baseline(golds: &[Label]) -> Result<f64, MetricsError> {
    if golds.is_empty() {
        return Err(MetricsError::Empty("golds"));
    }
    let constant = vec![majority_label(golds); golds.len()];
    macro_f1(&constant, golds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{NotSupport as N, Support as S};

    #[test]
    fn worked_values() {
        let golds: Vec<Label> = (0..10).map(|i| if i % 2 == 0 { S } else { N }).collect();
        let baseline = majority_baseline(&golds).unwrap();
        assert!((baseline - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(majority_baseline(&[S; 7]).unwrap(), 1.0);
        assert_eq!(macro_f1(&golds, &golds).unwrap(), 1.0);
        let flipped: Vec<Label> = golds.iter().map(|g| g.flip()).collect();
        assert_eq!(macro_f1(&flipped, &golds).unwrap(), 0.0);
    }

    #[test]
    fn ninety_ten_baseline() {
        // constant support on 90/10: P = 0.9, R = 1, F1 = 1.8 / 1.9
        let mut golds = vec![S; 90];
        golds.extend(vec![N; 10]);
        assert!((majority_baseline(&golds).unwrap() - 18.0 / 19.0).abs() < 1e-12);
    }

    #[test]
    fn union_policy_matches_sklearn_convention() {
        let golds = [S, N, S, N];
        assert!((macro_f1_with(&[S; 4], &golds, AbsentClassPolicy::ZeroUnionClasses).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(macro_f1(&[S], &[S, N]).is_err());
        assert!(macro_f1(&[], &[]).is_err());
        assert!(majority_baseline(&[]).is_err());
    }
}
