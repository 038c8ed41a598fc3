use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::TinyScorer;
use super::synthetic::GRADE_KEY;
use crate::dataset::{EvInstance, Label, OPTION_ROLE_KEY};

pub const HISTOGRAM_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeStats {
    pub count: usize,
    pub mean: f64,
}

/// Score distribution over incorrect options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginStats {
    pub count: usize,
    /// Counts over [0, 0.1), [0.1, 0.2), ..., [0.9, 1.0].
    pub histogram: Vec<usize>,
    pub mean: Option<f64>,
    /// Population variance.
    pub variance: Option<f64>,
    /// Keyed by the instance's grade tag, when present.
    pub per_grade: BTreeMap<String, GradeStats>,
    /// Population variance of the per-grade means (two or more grades).
    pub grade_mean_variance: Option<f64>,
}

fn mean_var(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var))
}

/// Scores the not_support instances that came from incorrect options of
/// multiple-choice items and summarizes how they spread.
pub fn decision_margin_stats(scorer: &TinyScorer, eval: &[EvInstance]) -> MarginStats {
    let mut scores = Vec::new();
    let mut by_grade: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for inst in eval {
        if inst.gold != Label::NotSupport || inst.source.get(OPTION_ROLE_KEY).map(String::as_str) != Some("incorrect") {
            continue;
        }
        let s = scorer.score(&inst.premise, &inst.hypothesis);
        scores.push(s);
        if let Some(grade) = inst.source.get(GRADE_KEY) {
            by_grade.entry(grade.clone()).or_default().push(s);
        }
    }
    let mut histogram = vec![0; HISTOGRAM_BINS];
    for &s in &scores {
        histogram[((s * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1)] += 1;
    }
    let (mean, variance) = match mean_var(&scores) {
        Some((m, v)) => (Some(m), Some(v)),
        None => (None, None),
    };
    let per_grade: BTreeMap<String, GradeStats> = by_grade
        .into_iter()
        .map(|(g, xs)| {
            let (mean, _) = mean_var(&xs).expect("non-empty group");
            (g, GradeStats { count: xs.len(), mean })
        })
        .collect();
    let grade_means: Vec<f64> = per_grade.values().map(|g| g.mean).collect();
    let grade_mean_variance = (grade_means.len() >= 2)
        .then(|| mean_var(&grade_means).map(|(_, v)| v))
        .flatten();
    MarginStats {
        count: scores.len(),
        histogram,
        mean,
        variance,
        per_grade,
        grade_mean_variance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::model::Featurizer;
    use crate::objectives::synthetic::{graded_instances, graded_items};

    #[test]
    fn empty_and_shape() {
        let scorer = TinyScorer::zeros(Featurizer::new(64, 0));
        let empty = decision_margin_stats(&scorer, &[]);
        assert_eq!((empty.count, empty.mean, empty.grade_mean_variance), (0, None, None));
        let rows = graded_instances(&graded_items(10, 0, "g"));
        let s = decision_margin_stats(&scorer, &rows);
        assert_eq!(s.count, 30);
        assert_eq!(s.mean, Some(0.5));
        assert_eq!(s.variance, Some(0.0));
        assert_eq!(s.histogram[5], 30);
        assert_eq!(s.per_grade.keys().collect::<Vec<_>>(), ["0.25", "0.50", "0.75"]);
        assert_eq!(s.grade_mean_variance, Some(0.0));
    }
}
