use serde::{Deserialize, Serialize};

use crate::hashing::fnv1a;

/// Sorted, deduplicated (index, value) pairs.
pub type SparseVec = Vec<(u32, f64)>;

pub const DEFAULT_DIM: usize = 1 << 16;

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Hashed bag of premise tokens, hypothesis tokens and premise×hypothesis
/// token pairs. Values are occurrence counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Featurizer {
    pub dim: usize,
    pub hash_seed: u64,
}

impl Featurizer {
    pub fn new(dim: usize, hash_seed: u64) -> Self {
        assert!(dim > 0 && dim <= u32::MAX as usize, "feature dimension out of range");
        Self { dim, hash_seed }
    }

    fn slot(&self, parts: &[&[u8]]) -> u32 {
        (fnv1a(self.hash_seed, parts) % self.dim as u64) as u32
    }

    pub fn featurize(&self, premise: &str, hypothesis: &str) -> SparseVec {
        let p = tokenize(premise);
        let h = tokenize(hypothesis);
        let mut idx = Vec::with_capacity(p.len() + h.len() + p.len() * h.len());
        idx.extend(p.iter().map(|t| self.slot(&[b"p", t.as_bytes()])));
        idx.extend(h.iter().map(|t| self.slot(&[b"h", t.as_bytes()])));
        for a in &p {
            for b in &h {
                idx.push(self.slot(&[b"x", a.as_bytes(), b.as_bytes()]));
            }
        }
        idx.sort_unstable();
        let mut out: SparseVec = Vec::new();
        for i in idx {
            match out.last_mut() {
                Some((j, v)) if *j == i => *v += 1.0,
                _ => out.push((i, 1.0)),
            }
        }
        out
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic scorer over hashed features: sigmoid(w·φ(p, h) + b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyScorer {
    pub featurizer: Featurizer,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl TinyScorer {
    pub fn zeros(featurizer: Featurizer) -> Self {
        Self {
            weights: vec![0.0; featurizer.dim],
            bias: 0.0,
            featurizer,
        }
    }

    pub fn logit(&self, x: &SparseVec) -> f64 {
        self.bias + x.iter().map(|&(i, v)| self.weights[i as usize] * v).sum::<f64>()
    }

    pub fn score_features(&self, x: &SparseVec) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn score(&self, premise: &str, hypothesis: &str) -> f64 {
        self.score_features(&self.featurizer.featurize(premise, hypothesis))
    }

    /// Parameters flattened as weights followed by bias.
    pub fn params(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.push(self.bias);
        v
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let d = self.weights.len();
        assert_eq!(params.len(), d + 1, "parameter length");
        self.weights.copy_from_slice(&params[..d]);
        self.bias = params[d];
    }
}
