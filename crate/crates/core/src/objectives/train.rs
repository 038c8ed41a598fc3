use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{batch_loss, gradient, Example, LossSettings, Objective, RankingOrientation};
use super::model::{Featurizer, TinyScorer, DEFAULT_DIM};
use super::ObjectiveError;
use crate::dataset::{EvInstance, Label, RankPair};
use crate::hashing::fork_seed;
use crate::metrics::macro_f1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub objective: Objective,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub margin: f64,
    pub orientation: RankingOrientation,
    pub warmup_ratio: f64,
    pub total_steps: usize,
    pub eval_every: usize,
    pub seed: u64,
    pub dim: usize,
    pub hash_seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            objective: Objective::Classification,
            learning_rate: 2e-4,
            batch_size: 8,
            margin: 0.2,
            orientation: RankingOrientation::Intent,
            warmup_ratio: 0.1,
            total_steps: 1400,
            eval_every: 200,
            seed: 0,
            dim: DEFAULT_DIM,
            hash_seed: 0,
        }
    }
}

impl TrainingConfig {
    /// Learning rate for the bundled synthetic sets. Plain SGD on the
    /// hashed scorer barely moves at the default rate within 1400 steps.
    pub const DESK_SCALE_LR: f64 = 1.0;

    /// Default schedule with [`Self::DESK_SCALE_LR`].
    pub fn desk_scale(objective: Objective) -> Self {
        Self {
            objective,
            learning_rate: Self::DESK_SCALE_LR,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        let bad = |msg: &str| Err(ObjectiveError::Config(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return bad("margin must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.warmup_ratio) {
            return bad("warmup_ratio must be in [0, 1]");
        }
        if self.total_steps == 0 || self.eval_every == 0 {
            return bad("total_steps and eval_every must be positive");
        }
        if self.dim == 0 || self.dim > u32::MAX as usize {
            return bad("dim out of range");
        }
        Ok(())
    }

    pub fn featurizer(&self) -> Featurizer {
        Featurizer::new(self.dim, self.hash_seed)
    }

    pub fn loss_settings(&self) -> LossSettings {
        LossSettings {
            margin: self.margin,
            orientation: self.orientation,
        }
    }

    pub fn warmup_steps(&self) -> usize {
        (self.warmup_ratio * self.total_steps as f64).ceil() as usize
    }

    /// Rate for 0-based step `t`: linear ramp to the base rate over the
    /// warmup steps, then constant.
    pub fn lr_at(&self, t: usize) -> f64 {
        let warm = self.warmup_steps();
        if warm == 0 || t >= warm {
            self.learning_rate
        } else {
            self.learning_rate * (t + 1) as f64 / warm as f64
        }
    }
}

/// Training or dev data for one objective.
#[derive(Debug, Clone, Copy)]
pub enum TrainData<'a> {
    Instances(&'a [EvInstance]),
    Pairs(&'a [RankPair]),
}

impl TrainData<'_> {
    pub fn objective(&self) -> Objective {
        match self {
            TrainData::Instances(_) => Objective::Classification,
            TrainData::Pairs(_) => Objective::Ranking,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TrainData::Instances(v) => v.len(),
            TrainData::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn featurize(&self, f: &Featurizer) -> Vec<Example> {
        match self {
            TrainData::Instances(v) => v
                .par_iter()
                .map(|i| Example::Labeled {
                    x: f.featurize(&i.premise, &i.hypothesis),
                    gold: i.gold,
                })
                .collect(),
            TrainData::Pairs(v) => v
                .par_iter()
                .map(|p| Example::Pair {
                    strong: f.featurize(&p.premise, &p.strong_hypothesis),
                    weak: f.featurize(&p.premise, &p.weak_hypothesis),
                })
                .collect(),
        }
    }
}

/// Dev macro-F1 for labeled examples, fraction of pairs with the stronger
/// hypothesis scored strictly higher for ranking.
pub fn dev_metric(scorer: &TinyScorer, dev: &[Example]) -> f64 {
    let mut preds = Vec::new();
    let mut golds = Vec::new();
    let mut ordered = 0usize;
    let mut pairs = 0usize;
    for ex in dev {
        match ex {
            Example::Labeled { x, gold } => {
                let s = scorer.score_features(x);
                preds.push(if s > 0.5 { Label::Support } else { Label::NotSupport });
                golds.push(*gold);
            }
            Example::Pair { strong, weak } => {
                pairs += 1;
                if scorer.score_features(strong) > scorer.score_features(weak) {
                    ordered += 1;
                }
            }
        }
    }
    if pairs > 0 {
        ordered as f64 / pairs as f64
    } else {
        macro_f1(&preds, &golds).unwrap_or(0.0)
    }
}

/// Pair-order accuracy of a scorer on raw pairs.
pub fn pair_accuracy(scorer: &TinyScorer, pairs: &[RankPair]) -> f64 {
    dev_metric(scorer, &TrainData::Pairs(pairs).featurize(&scorer.featurizer))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub dim: usize,
    pub hash_seed: u64,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Step at which this checkpoint was taken.
    pub step: usize,
    pub dev_metric: f64,
    pub config: TrainingConfig,
}

impl Checkpoint {
    pub fn scorer(&self) -> TinyScorer {
        TinyScorer {
            featurizer: Featurizer::new(self.dim, self.hash_seed),
            weights: self.weights.clone(),
            bias: self.bias,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ObjectiveError> {
        let text = serde_json::to_string(self).map_err(|e| ObjectiveError::Format(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| ObjectiveError::Io(path.to_path_buf(), e))
    }

    pub fn load(path: &Path) -> Result<Self, ObjectiveError> {
        let text = std::fs::read_to_string(path).map_err(|e| ObjectiveError::Io(path.to_path_buf(), e))?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| ObjectiveError::Format(e.to_string()))?;
        if ck.weights.len() != ck.dim {
            return Err(ObjectiveError::Format(format!(
                "checkpoint has {} weights for dimension {}",
                ck.weights.len(),
                ck.dim
            )));
        }
        Ok(ck)
    }
}

/// One evaluation point of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: usize,
    pub learning_rate: f64,
    /// Mean training batch loss since the previous evaluation.
    pub loss: f64,
    pub dev_metric: f64,
    pub best: bool,
}

impl crate::dataset::Record for LogRecord {}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub best: Checkpoint,
    pub log: Vec<LogRecord>,
}

/// Mini-batch SGD from zero weights. Batches are drawn from seeded
/// per-epoch shuffles; the dev set is evaluated every `eval_every` steps and
/// after the last step, and the best checkpoint (earliest on ties) is kept.
pub fn train(train_data: TrainData<'_>, dev_data: TrainData<'_>, cfg: &TrainingConfig) -> Result<TrainOutcome, ObjectiveError> {
    cfg.validate()?;
    if train_data.is_empty() {
        return Err(ObjectiveError::EmptyData("training"));
    }
    if dev_data.is_empty() {
        return Err(ObjectiveError::EmptyData("dev"));
    }
    if train_data.objective() != cfg.objective || dev_data.objective() != cfg.objective {
        return Err(ObjectiveError::Config(format!(
            "{:?} objective needs {} data",
            cfg.objective,
            match cfg.objective {
                Objective::Classification => "instance",
                Objective::Ranking => "ranking pair",
            }
        )));
    }
    let featurizer = cfg.featurizer();
    let train_ex = train_data.featurize(&featurizer);
    let dev_ex = dev_data.featurize(&featurizer);
    let settings = cfg.loss_settings();

    let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(cfg.seed, "train/shuffle"));
    let mut order: Vec<usize> = (0..train_ex.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0;

    let mut scorer = TinyScorer::zeros(featurizer);
    let mut best: Option<Checkpoint> = None;
    let mut log = Vec::new();
    let mut loss_sum = 0.0;
    let mut loss_steps = 0usize;
    let mut batch = Vec::with_capacity(cfg.batch_size);

    for t in 0..cfg.total_steps {
        batch.clear();
        while batch.len() < cfg.batch_size {
            if cursor == order.len() {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            batch.push(train_ex[order[cursor]].clone());
            cursor += 1;
        }
        loss_sum += batch_loss(&scorer, &batch, settings);
        loss_steps += 1;
        let lr = cfg.lr_at(t);
        let g = gradient(&scorer, &batch, settings);
        for (&i, &v) in &g.weights {
            scorer.weights[i as usize] -= lr * v;
        }
        scorer.bias -= lr * g.bias;

        let step = t + 1;
        if step % cfg.eval_every == 0 || step == cfg.total_steps {
            let metric = dev_metric(&scorer, &dev_ex);
            let improved = best.as_ref().is_none_or(|b| metric > b.dev_metric);
            if improved {
                best = Some(Checkpoint {
                    dim: featurizer.dim,
                    hash_seed: featurizer.hash_seed,
                    weights: scorer.weights.clone(),
                    bias: scorer.bias,
                    step,
                    dev_metric: metric,
                    config: cfg.clone(),
                });
            }
            log::info!("step {step}: loss {:.6}, dev {metric:.4}", loss_sum / loss_steps as f64);
            log.push(LogRecord {
                step,
                learning_rate: lr,
                loss: loss_sum / loss_steps as f64,
                dev_metric: metric,
                best: improved,
            });
            loss_sum = 0.0;
            loss_steps = 0;
        }
    }
    Ok(TrainOutcome {
        best: best.expect("at least one evaluation"),
        log,
    })
}
