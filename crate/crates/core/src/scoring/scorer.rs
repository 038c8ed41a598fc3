use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backend::{query, Backend, BackendReply, RetryPolicy};
use super::cache::{CacheKey, ReplyCache};
use super::score::{classify, entailment_score, label_from_generation, ScoringConfig};
use super::template::PromptTemplate;
use super::ScoringError;
use crate::dataset::{Category, EvInstance, Label, ReasoningType};
use crate::hashing::fork_seed;

/// Normalized Yes-probability with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailmentScore {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_yes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_no: Option<f64>,
    pub backend_id: String,
    pub template_name: String,
}

/// Score and label for one premise–hypothesis pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub score: EntailmentScore,
    pub predicted: Label,
    /// Generated text matched neither alias set.
    pub unmatched_generation: bool,
}

/// One row of a scoring run. Exactly one of `score` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredInstance {
    pub id: String,
    pub dataset: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_type: Option<ReasoningType>,
    pub gold: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<EntailmentScore>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unmatched_generation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScoredInstance {
    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }
}

impl crate::dataset::Record for ScoredInstance {}

/// Backend, prompt template, configuration and optional cache bundled for
/// repeated scoring.
#[derive(Clone, Copy)]
pub struct Scorer<'a> {
    backend: &'a dyn Backend,
    template: &'a PromptTemplate,
    config: &'a ScoringConfig,
    cache: Option<&'a dyn ReplyCache>,
    retry: RetryPolicy,
}

impl<'a> Scorer<'a> {
    pub fn new(backend: &'a dyn Backend, template: &'a PromptTemplate, config: &'a ScoringConfig) -> Self {
        Self {
            backend,
            template,
            config,
            cache: None,
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_cache(mut self, cache: &'a dyn ReplyCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn backend(&self) -> &'a dyn Backend {
        self.backend
    }

    pub fn template(&self) -> &'a PromptTemplate {
        self.template
    }

    pub fn config(&self) -> &'a ScoringConfig {
        self.config
    }

    pub fn cache_key(&self, prompt: &str) -> CacheKey {
        CacheKey::new(
            self.backend.id(),
            self.template.name(),
            prompt,
            &self.config.yes_aliases,
            &self.config.no_aliases,
        )
    }

    /// Renders, queries (or reads the cache), and scores.
    pub fn score_pair(&self, premise: &str, hypothesis: &str) -> Result<PairScore, ScoringError> {
        let prompt = self.template.render(premise, hypothesis);
        let key = self.cache_key(&prompt);
        let reply = match self.cache.and_then(|c| c.get(&key)) {
            Some(reply) => reply,
            None => {
                let reply = self.retry.run(|| query(self.backend, &prompt, self.config))?;
                if let Some(cache) = self.cache {
                    cache.put(&key, &reply);
                }
                reply
            }
        };
        self.score_reply(&reply, &key)
    }

    fn score_reply(&self, reply: &BackendReply, key: &CacheKey) -> Result<PairScore, ScoringError> {
        let backend_id = self.backend.id().to_string();
        let template_name = self.template.name().to_string();
        match *reply {
            BackendReply::TokenProbs { prob_yes, prob_no } => {
                let value = entailment_score(prob_yes, prob_no, self.config)?;
                Ok(PairScore {
                    score: EntailmentScore {
                        value,
                        prob_yes: Some(prob_yes),
                        prob_no: Some(prob_no),
                        backend_id,
                        template_name,
                    },
                    predicted: classify(value, self.config),
                    unmatched_generation: false,
                })
            }
            BackendReply::LabelText { ref text } => {
                // one RNG stream per prompt, so the coin flip is reproducible
                // and independent of scoring order
                let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(self.config.rng_seed, key.as_str()));
                let generated = label_from_generation(text, self.config, &mut rng);
                let value = match generated.label {
                    Label::Support => 1.0,
                    Label::NotSupport => 0.0,
                };
                Ok(PairScore {
                    score: EntailmentScore {
                        value,
                        prob_yes: None,
                        prob_no: None,
                        backend_id,
                        template_name,
                    },
                    predicted: generated.label,
                    unmatched_generation: !generated.matched,
                })
            }
        }
    }

    /// Never fails: backend errors are recorded on the returned row.
    pub fn score_instance(&self, instance: &EvInstance) -> ScoredInstance {
        let mut row = ScoredInstance {
            id: instance.id.clone(),
            dataset: instance.dataset.clone(),
            category: instance.category,
            reasoning_type: instance.reasoning_type,
            gold: instance.gold,
            predicted: None,
            score: None,
            unmatched_generation: false,
            error: None,
        };
        match self.score_pair(&instance.premise, &instance.hypothesis) {
            Ok(s) => {
                row.predicted = Some(s.predicted);
                row.score = Some(s.score);
                row.unmatched_generation = s.unmatched_generation;
            }
            Err(e) => {
                log::warn!("instance {} failed: {e}", instance.id);
                row.error = Some(e.to_string());
            }
        }
        row
    }
}

/// Scores with at most `parallelism` requests in flight. Output is sorted by
/// instance id.
pub fn batch_score(
    instances: &[EvInstance],
    scorer: &Scorer<'_>,
    parallelism: usize,
) -> Result<Vec<ScoredInstance>, ScoringError> {
    let mut rows = parallel_map(instances, parallelism, |inst| scorer.score_instance(inst))?;
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(rows)
}

/// Order-preserving map over a bounded thread pool.
pub fn parallel_map<T: Sync, U: Send>(
    items: &[T],
    parallelism: usize,
    f: impl Fn(&T) -> U + Sync + Send,
) -> Result<Vec<U>, ScoringError> {
    use rayon::prelude::*;

    if parallelism == 0 {
        return Err(ScoringError::Config("parallelism must be at least 1".into()));
    }
    if parallelism == 1 || items.len() <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| ScoringError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::backend::{BackendError, Capability, MockBackend};
    use crate::scoring::cache::MemoryCache;
    use std::collections::BTreeMap;

    fn inst(id: &str) -> EvInstance {
        EvInstance {
            id: id.into(),
            dataset: "d".into(),
            category: Category::Nli,
            premise: format!("premise {id}"),
            hypothesis: "h".into(),
            gold: Label::Support,
            reasoning_type: None,
            source: BTreeMap::new(),
        }
    }

    #[test]
    fn mock_scores_and_caches() {
        let backend = MockBackend::token_probs("mock", |_| (0.9, 0.05));
        let template = PromptTemplate::default_template();
        let cfg = ScoringConfig::default();
        let cache = MemoryCache::new();
        let scorer = Scorer::new(&backend, &template, &cfg).with_cache(&cache);
        let first = scorer.score_instance(&inst("a"));
        assert!((first.score.as_ref().unwrap().value - 0.9 / 0.95).abs() < 1e-12);
        assert_eq!(first.predicted, Some(Label::Support));
        let second = scorer.score_instance(&inst("a"));
        assert_eq!(backend.calls(), 1);
        assert_eq!(first, second);
    }

    #[test]
    fn label_text_path_has_no_probabilities() {
        let backend = MockBackend::label_text("gpt", |_| "Yes".into());
        let template = PromptTemplate::default_template();
        let cfg = ScoringConfig::default();
        let row = Scorer::new(&backend, &template, &cfg).score_instance(&inst("a"));
        assert_eq!(row.predicted, Some(Label::Support));
        let score = row.score.unwrap();
        assert_eq!(score.prob_yes, None);
        assert_eq!(score.prob_no, None);
    }

    #[test]
    fn failures_are_isolated() {
        let backend = MockBackend::new("flaky", Capability::TokenProbs, |p| {
            if p.contains("premise bad") {
                Err(BackendError::Transport("connection reset".into()))
            } else {
                Ok(BackendReply::TokenProbs { prob_yes: 0.2, prob_no: 0.7 })
            }
        });
        let template = PromptTemplate::default_template();
        let cfg = ScoringConfig::default();
        let scorer = Scorer::new(&backend, &template, &cfg).with_retry(RetryPolicy::no_delay());
        let rows = batch_score(&[inst("ok1"), inst("bad"), inst("ok2")], &scorer, 2).unwrap();
        assert_eq!(rows.iter().filter(|r| r.is_failed()).count(), 1);
        assert_eq!(rows.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), vec!["bad", "ok1", "ok2"]);
        // 3 attempts for the failing instance, one each for the others
        assert_eq!(backend.calls(), 5);
    }

    #[test]
    fn empty_and_zero_parallelism() {
        let backend = MockBackend::token_probs("m", |_| (0.5, 0.5));
        let template = PromptTemplate::default_template();
        let cfg = ScoringConfig::default();
        let scorer = Scorer::new(&backend, &template, &cfg);
        assert!(batch_score(&[], &scorer, 4).unwrap().is_empty());
        assert!(batch_score(&[inst("a")], &scorer, 0).is_err());
    }
}
