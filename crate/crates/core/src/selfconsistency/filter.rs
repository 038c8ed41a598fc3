use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SelfConsistencyError;

/// How majority-vote ties between answers are broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Larger summed entailment score, then lexicographically smallest.
    #[default]
    ScoreSum,
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub k: usize,
    pub samples_per_question: usize,
    pub tie_break: TieBreak,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            k: 5,
            samples_per_question: 40,
            tie_break: TieBreak::ScoreSum,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), SelfConsistencyError> {
        if self.k == 0 {
            return Err(SelfConsistencyError::Invalid("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Indices into the input, split by the top-k cut.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TopK {
    /// Highest score first; equal scores keep input order.
    pub kept: Vec<usize>,
    pub discarded: Vec<usize>,
    /// Samples with no score, excluded from the ranking.
    pub unscored: Vec<usize>,
}

/// Keeps the `k` highest scores (all of them if fewer than `k`).
pub fn filter_top_k(scores: &[Option<f64>], k: usize) -> TopK {
    let mut ranked: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].is_some()).collect();
    let unscored = (0..scores.len()).filter(|&i| scores[i].is_none()).collect();
    // sort_by is stable, so equal scores stay in input order
    ranked.sort_by(|&a, &b| scores[b].unwrap().total_cmp(&scores[a].unwrap()));
    let discarded = ranked.split_off(k.min(ranked.len()));
    TopK {
        kept: ranked,
        discarded,
        unscored,
    }
}

/// Most frequent answer. Ties go to the larger score sum under
/// [`TieBreak::ScoreSum`], then to the lexicographically smallest answer.
/// Returns None for an empty input.
pub fn majority_vote(answers: &[&str], scores: &[f64], tie_break: TieBreak) -> Option<String> {
    assert_eq!(answers.len(), scores.len(), "one score per answer");
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (a, s) in answers.iter().zip(scores) {
        let e = tally.entry(a).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += s;
    }
    // BTreeMap iterates in lexicographic order, so keeping the first maximum
    // resolves the final tie
    let mut best: Option<(&str, usize, f64)> = None;
    for (a, (count, sum)) in tally {
        let better = match best {
            None => true,
            Some((_, bc, bs)) => match tie_break {
                TieBreak::ScoreSum => count > bc || (count == bc && sum > bs),
                TieBreak::Lexicographic => count > bc,
            },
        };
        if better {
            best = Some((a, count, sum));
        }
    }
    best.map(|(a, _, _)| a.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_k_examples() {
        let scores: Vec<Option<f64>> = (0..40).map(|i| Some(i as f64 / 40.0)).collect();
        let t = filter_top_k(&scores, 5);
        assert_eq!(t.kept, [39, 38, 37, 36, 35]);
        assert_eq!(t.discarded.len(), 35);
        let t = filter_top_k(&[Some(0.1), Some(0.2), Some(0.3)], 5);
        assert_eq!((t.kept.len(), t.discarded.len()), (3, 0));
        let t = filter_top_k(&[Some(0.5); 8], 3);
        assert_eq!(t.kept, [0, 1, 2]);
        let t = filter_top_k(&[None, Some(0.2), Some(0.9), None], 1);
        assert_eq!((t.kept, t.discarded, t.unscored), (vec![2], vec![1], vec![0, 3]));
    }

    #[test]
    fn vote_examples() {
        let v = |a: &[&str], s: &[f64]| majority_vote(a, s, TieBreak::ScoreSum);
        assert_eq!(v(&["A", "A", "B", "C", "A"], &[0.0; 5]).unwrap(), "A");
        assert_eq!(v(&["B", "A"], &[0.4, 0.9]).unwrap(), "A");
        assert_eq!(v(&["A", "B"], &[0.4, 0.9]).unwrap(), "B");
        assert_eq!(v(&["B", "A"], &[0.5, 0.5]).unwrap(), "A");
        assert_eq!(majority_vote(&["B", "A"], &[0.9, 0.1], TieBreak::Lexicographic).unwrap(), "A");
        assert_eq!(v(&[], &[]), None);
    }
}
