use serde::{Deserialize, Serialize};

use super::filter::{filter_top_k, majority_vote, FilterConfig, TieBreak};
use super::sample::{HypothesisCache, QuestionGroup};
use super::SelfConsistencyError;
use crate::dataset::StatementConverter;
use crate::scoring::{parallel_map, Scorer};

/// A question's samples after scoring. Failed samples keep `score: None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGroup {
    pub group: QuestionGroup,
    pub hypotheses: Vec<String>,
    /// (sample index, error message) for samples whose scoring failed.
    pub failures: Vec<(usize, String)>,
}

impl ScoredGroup {
    pub fn scores(&self) -> Vec<Option<f64>> {
        self.group.samples.iter().map(|s| s.score.as_ref().map(|e| e.value)).collect()
    }
}

/// Scores every sample with its rationale as premise and the statement form
/// of its prediction as hypothesis. Requests fan out across all questions,
/// bounded by `parallelism`.
pub fn score_groups(
    groups: Vec<QuestionGroup>,
    scorer: &Scorer<'_>,
    converter: &dyn StatementConverter,
    parallelism: usize,
) -> Result<Vec<ScoredGroup>, SelfConsistencyError> {
    let mut cache = HypothesisCache::new(converter);
    let hypotheses: Vec<Vec<String>> = groups
        .iter()
        .map(|g| {
            g.samples
                .iter()
                .map(|s| cache.hypothesis(&s.question, &s.predicted_answer))
                .collect()
        })
        .collect();
    let jobs: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| (0..g.samples.len()).map(move |si| (gi, si)))
        .collect();
    let results = parallel_map(&jobs, parallelism, |&(gi, si)| {
        scorer.score_pair(&groups[gi].samples[si].rationale, &hypotheses[gi][si])
    })?;
    let mut scored: Vec<ScoredGroup> = groups
        .into_iter()
        .zip(hypotheses)
        .map(|(group, hypotheses)| ScoredGroup {
            group,
            hypotheses,
            failures: Vec::new(),
        })
        .collect();
    for (&(gi, si), result) in jobs.iter().zip(results) {
        match result {
            Ok(pair) => scored[gi].group.samples[si].score = Some(pair.score),
            Err(e) => {
                log::warn!("sample {} of {} failed: {e}", si, scored[gi].group.question_id);
                scored[gi].group.samples[si].score = None;
                scored[gi].failures.push((si, e.to_string()));
            }
        }
    }
    Ok(scored)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTrace {
    pub id: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// What happened to one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionTrace {
    pub question_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_answer: Option<String>,
    pub samples: Vec<SampleTrace>,
    pub kept: Vec<String>,
    pub discarded: Vec<String>,
    pub failed: Vec<String>,
    /// Vote over every validly scored sample; None means abstain.
    pub vanilla_answer: Option<String>,
    pub filtered_answer: Option<String>,
}

impl QuestionTrace {
    pub fn vanilla_correct(&self) -> bool {
        self.vanilla_answer.is_some() && self.vanilla_answer == self.gold_answer
    }

    pub fn filtered_correct(&self) -> bool {
        self.filtered_answer.is_some() && self.filtered_answer == self.gold_answer
    }
}

/// Top-k filter and vote for one scored question. The vanilla answer uses
/// the same valid samples and tie rule, so k ≥ (valid samples) reproduces
/// it exactly.
pub fn decide(scored: &ScoredGroup, k: usize, tie_break: TieBreak) -> QuestionTrace {
    let samples = &scored.group.samples;
    let scores = scored.scores();
    let top = filter_top_k(&scores, k);
    let vote = |idx: &[usize]| {
        let answers: Vec<&str> = idx.iter().map(|&i| samples[i].predicted_answer.as_str()).collect();
        let s: Vec<f64> = idx.iter().map(|&i| scores[i].expect("ranked samples are scored")).collect();
        majority_vote(&answers, &s, tie_break)
    };
    let mut valid: Vec<usize> = (0..samples.len()).filter(|&i| scores[i].is_some()).collect();
    valid.sort_unstable();
    let ids = |idx: &[usize]| idx.iter().map(|&i| samples[i].id_or(i)).collect::<Vec<_>>();
    QuestionTrace {
        question_id: scored.group.question_id.clone(),
        gold_answer: scored.group.gold_answer.clone(),
        samples: samples
            .iter()
            .enumerate()
            .map(|(i, s)| SampleTrace {
                id: s.id_or(i),
                answer: s.predicted_answer.clone(),
                score: scores[i],
            })
            .collect(),
        kept: ids(&top.kept),
        discarded: ids(&top.discarded),
        failed: ids(&top.unscored),
        vanilla_answer: vote(&valid),
        filtered_answer: vote(&top.kept),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub k: usize,
    pub tie_break: TieBreak,
    pub questions: usize,
    pub vanilla_accuracy: f64,
    pub filtered_accuracy: f64,
    pub vanilla_abstained: usize,
    pub filtered_abstained: usize,
    pub failed_samples: usize,
    pub traces: Vec<QuestionTrace>,
}

fn require_gold(scored: &[ScoredGroup]) -> Result<(), SelfConsistencyError> {
    if scored.is_empty() {
        return Err(SelfConsistencyError::Invalid("no questions".into()));
    }
    match scored.iter().find(|g| g.group.gold_answer.is_none()) {
        Some(g) => Err(SelfConsistencyError::MissingGold(g.group.question_id.clone())),
        None => Ok(()),
    }
}

/// Accuracy of filtered and vanilla voting over already scored questions.
/// Abstentions count as incorrect.
pub fn evaluate(scored: &[ScoredGroup], cfg: &FilterConfig) -> Result<PipelineReport, SelfConsistencyError> {
    cfg.validate()?;
    require_gold(scored)?;
    let traces: Vec<QuestionTrace> = scored.iter().map(|g| decide(g, cfg.k, cfg.tie_break)).collect();
    let n = traces.len() as f64;
    Ok(PipelineReport {
        k: cfg.k,
        tie_break: cfg.tie_break,
        questions: traces.len(),
        vanilla_accuracy: traces.iter().filter(|t| t.vanilla_correct()).count() as f64 / n,
        filtered_accuracy: traces.iter().filter(|t| t.filtered_correct()).count() as f64 / n,
        vanilla_abstained: traces.iter().filter(|t| t.vanilla_answer.is_none()).count(),
        filtered_abstained: traces.iter().filter(|t| t.filtered_answer.is_none()).count(),
        failed_samples: scored.iter().map(|g| g.failures.len()).sum(),
        traces,
    })
}

/// Score, filter and vote.
pub fn run_pipeline(
    groups: Vec<QuestionGroup>,
    scorer: &Scorer<'_>,
    converter: &dyn StatementConverter,
    cfg: &FilterConfig,
    parallelism: usize,
) -> Result<PipelineReport, SelfConsistencyError> {
    cfg.validate()?;
    let scored = score_groups(groups, scorer, converter, parallelism)?;
    evaluate(&scored, cfg)
}

pub const DEFAULT_K_SET: [usize; 5] = [3, 5, 10, 20, 30];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub k: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KAblation {
    pub questions: usize,
    pub vanilla_accuracy: f64,
    pub points: Vec<KPoint>,
}

/// Filtered accuracy for each k over one set of scores.
pub fn k_ablation(scored: &[ScoredGroup], k_set: &[usize], tie_break: TieBreak) -> Result<KAblation, SelfConsistencyError> {
    if k_set.is_empty() {
        return Err(SelfConsistencyError::Invalid("empty k set".into()));
    }
    let mut points = Vec::with_capacity(k_set.len());
    let mut vanilla = None;
    for &k in k_set {
        let report = evaluate(scored, &FilterConfig { k, tie_break, ..FilterConfig::default() })?;
        vanilla.get_or_insert(report.vanilla_accuracy);
        points.push(KPoint {
            k,
            accuracy: report.filtered_accuracy,
        });
    }
    Ok(KAblation {
        questions: scored.len(),
        vanilla_accuracy: vanilla.expect("non-empty k set"),
        points,
    })
}
