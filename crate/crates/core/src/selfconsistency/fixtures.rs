//! Constructed sample sets with known outcomes.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::pipeline::ScoredGroup;
use super::sample::{CotSample, HypothesisCache, QuestionGroup};
use crate::dataset::StatementConverter;
use crate::hashing::fork_seed;
use crate::scoring::{EntailmentScore, MockBackend, PromptTemplate};

const COLORS: [&str; 5] = ["red", "blue", "green", "yellow", "white"];
const THINGS: [&str; 10] = ["kite", "boat", "door", "scarf", "bicycle", "tent", "fence", "umbrella", "bench", "mug"];

/// Questions where most samples are wrong, yet enough samples are both
/// correct and consistent to win a top-k vote under a perfect verifier.
#[derive(Debug, Clone)]
pub struct AdversarialSuite {
    pub groups: Vec<QuestionGroup>,
    /// Questions on which vanilla voting is wrong by construction.
    pub designated: Vec<String>,
    consistent: HashSet<(String, usize)>,
}

impl AdversarialSuite {
    pub const QUESTIONS: usize = 20;
    pub const SAMPLES: usize = 40;
    pub const DESIGNATED: usize = 6;

    /// 20 questions × 40 samples over five choices. On the designated
    /// questions 22 samples back one wrong answer and 6 of the 18 correct
    /// ones are consistent. Every other question has a correct plurality and
    /// 5 to 8 consistent correct samples.
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(seed, "sc/adversarial"));
        let mut groups = Vec::with_capacity(Self::QUESTIONS);
        let mut designated = Vec::new();
        let mut consistent = HashSet::new();
        for q in 0..Self::QUESTIONS {
            let qid = format!("adv-{q:02}");
            let thing = THINGS[q % THINGS.len()];
            let question = format!("What color is the {thing} in picture {q}?");
            let mut choices: Vec<String> = COLORS.iter().map(|c| c.to_string()).collect();
            choices.shuffle(&mut rng);
            let gold = choices[0].clone();
            // (answer index, consistent) per sample
            let mut plan: Vec<(usize, bool)> = Vec::with_capacity(Self::SAMPLES);
            if q < Self::DESIGNATED {
                designated.push(qid.clone());
                plan.extend((0..22).map(|_| (1, false)));
                plan.extend((0..18).map(|i| (0, i < 6)));
            } else {
                let correct = rng.random_range(16..=26);
                let n_consistent = rng.random_range(5..=8);
                plan.extend((0..correct).map(|i| (0, i < n_consistent)));
                // spread the rest so no wrong answer reaches the correct count
                let mut d = 1;
                while plan.len() < Self::SAMPLES {
                    plan.push((d, false));
                    d = d % 4 + 1;
                }
            }
            plan.shuffle(&mut rng);
            let samples = plan
                .iter()
                .enumerate()
                .map(|(i, &(a, ok))| {
                    let answer = &choices[a];
                    if ok {
                        consistent.insert((qid.clone(), i));
                    }
                    let rationale = if ok {
                        format!("Picture {q} shows the {thing} painted {answer}, so the answer is {answer}.")
                    } else {
                        format!("Guess {i}: the {thing} is probably {answer}, so the answer is {answer}.")
                    };
                    CotSample {
                        question_id: qid.clone(),
                        sample_id: Some(format!("{qid}-s{i:02}")),
                        question: question.clone(),
                        choices: choices.clone(),
                        rationale,
                        predicted_answer: answer.clone(),
                        gold_answer: Some(gold.clone()),
                        score: None,
                    }
                })
                .collect();
            groups.push(QuestionGroup {
                question_id: qid,
                question,
                gold_answer: Some(gold),
                samples,
            });
        }
        Self {
            groups,
            designated,
            consistent,
        }
    }

    pub fn samples(&self) -> Vec<CotSample> {
        self.groups.iter().flat_map(|g| g.samples.iter().cloned()).collect()
    }

    pub fn is_consistent(&self, question_id: &str, index: usize) -> bool {
        self.consistent.contains(&(question_id.to_string(), index))
    }

    /// Verifier that knows the answer key: P(Yes) = 1 for samples that are
    /// correct and consistent, P(No) = 1 otherwise. Keyed by rendered prompt,
    /// so it only answers for this suite, this template and this converter.
    pub fn oracle_backend(&self, template: &PromptTemplate, converter: &dyn StatementConverter) -> MockBackend {
        let mut hyps = HypothesisCache::new(converter);
        let mut table: HashMap<String, (f64, f64)> = HashMap::new();
        for g in &self.groups {
            for (i, s) in g.samples.iter().enumerate() {
                let prompt = template.render(&s.rationale, &hyps.hypothesis(&s.question, &s.predicted_answer));
                let good = Some(&s.predicted_answer) == s.gold_answer.as_ref() && self.is_consistent(&g.question_id, i);
                table.insert(prompt, if good { (1.0, 0.0) } else { (0.0, 1.0) });
            }
        }
        MockBackend::token_probs("oracle", move |prompt| {
            table.get(prompt).copied().unwrap_or_else(|| {
                log::warn!("oracle has no entry for prompt; answering No");
                (0.0, 1.0)
            })
        })
    }
}

/// Score-noise model: each sample is correct with probability
/// `p_correct`, wrong answers are uniform over the distractors, and the
/// verifier's score is drawn from one Beta distribution for correct samples
/// and another for incorrect ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BetaNoiseConfig {
    pub questions: usize,
    pub samples: usize,
    pub choices: usize,
    pub p_correct: f64,
    pub correct_alpha: f64,
    pub correct_beta: f64,
    pub incorrect_alpha: f64,
    pub incorrect_beta: f64,
    pub seed: u64,
}

impl Default for BetaNoiseConfig {
    fn default() -> Self {
        Self {
            questions: 500,
            samples: 40,
            choices: 5,
            p_correct: 0.5,
            correct_alpha: 5.0,
            correct_beta: 2.0,
            incorrect_alpha: 2.0,
            incorrect_beta: 5.0,
            seed: 0,
        }
    }
}

/// Already scored questions drawn from the noise model. Choice 0 ("c0") is
/// always the gold answer.
pub fn beta_noise_groups(cfg: &BetaNoiseConfig) -> Vec<ScoredGroup> {
    assert!(cfg.choices >= 2, "need a distractor");
    let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(cfg.seed, "sc/beta-noise"));
    let good = Beta::new(cfg.correct_alpha, cfg.correct_beta).expect("valid Beta parameters");
    let bad = Beta::new(cfg.incorrect_alpha, cfg.incorrect_beta).expect("valid Beta parameters");
    let choices: Vec<String> = (0..cfg.choices).map(|c| format!("c{c}")).collect();
    (0..cfg.questions)
        .map(|q| {
            let qid = format!("sim-{q:04}");
            let samples: Vec<CotSample> = (0..cfg.samples)
                .map(|i| {
                    let correct = rng.random_bool(cfg.p_correct);
                    let (answer, value) = if correct {
                        (0, good.sample(&mut rng))
                    } else {
                        (rng.random_range(1..cfg.choices), bad.sample(&mut rng))
                    };
                    CotSample {
                        question_id: qid.clone(),
                        sample_id: Some(format!("{qid}-s{i:02}")),
                        question: format!("Question {q}?"),
                        choices: choices.clone(),
                        rationale: format!("rationale {i}"),
                        predicted_answer: choices[answer].clone(),
                        gold_answer: Some(choices[0].clone()),
                        score: Some(EntailmentScore {
                            value,
                            prob_yes: Some(value),
                            prob_no: Some(1.0 - value),
                            backend_id: "beta-noise".into(),
                            template_name: "none".into(),
                        }),
                    }
                })
                .collect();
            let hypotheses = samples.iter().map(|s| s.predicted_answer.clone()).collect();
            ScoredGroup {
                group: QuestionGroup {
                    question_id: qid,
                    question: format!("Question {q}?"),
                    gold_answer: Some(choices[0].clone()),
                    samples,
                },
                hypotheses,
                failures: Vec::new(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_shape() {
        let suite = AdversarialSuite::generate(0);
        assert_eq!(suite.groups.len(), 20);
        assert!(suite.groups.iter().all(|g| g.samples.len() == 40));
        assert_eq!(suite.designated.len(), AdversarialSuite::DESIGNATED);
        for g in &suite.groups {
            let gold = g.gold_answer.as_ref().unwrap();
            let wrong = g.samples.iter().filter(|s| &s.predicted_answer != gold).count();
            let good = (0..40).filter(|&i| suite.is_consistent(&g.question_id, i)).count();
            assert!(good >= 5);
            if suite.designated.contains(&g.question_id) {
                assert_eq!(wrong, 22);
            }
        }
    }

    #[test]
    fn beta_groups_are_seeded() {
        let cfg = BetaNoiseConfig { questions: 3, ..Default::default() };
        let a = beta_noise_groups(&cfg);
        assert_eq!(a, beta_noise_groups(&cfg));
        assert_ne!(a, beta_noise_groups(&BetaNoiseConfig { seed: 1, ..cfg }));
        assert!(a.iter().all(|g| g.group.samples.iter().all(|s| s.score.is_some())));
    }
}
