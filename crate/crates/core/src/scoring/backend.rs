use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ScoringConfig;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BackendError {
    /// Connection, timeout or server-side failure. Retried.
    #[error("transport error: {0}")]
    Transport(String),
    /// The service answered but the reply could not be used. Not retried.
    #[error("malformed reply: {0}")]
    Malformed(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport(_))
    }
}

/// What a backend can report about a prompt's continuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    /// Probabilities of candidate next tokens.
    TokenProbs,
    /// Only generated text.
    LabelText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenProb {
    pub token: String,
    pub prob: f64,
}

impl TokenProb {
    pub fn new(token: impl Into<String>, prob: f64) -> Self {
        Self { token: token.into(), prob }
    }
}

/// A completion service.
pub trait Backend: Send + Sync {
    /// Stable identifier used in cache keys and reports.
    fn id(&self) -> &str;

    fn capability(&self) -> Capability;

    /// Probabilities of the most likely next tokens after `prompt`.
    fn next_token_probs(&self, prompt: &str) -> Result<Vec<TokenProb>, BackendError>;

    /// Free-form continuation of at most `max_tokens` tokens.
    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String, BackendError>;
}

/// The part of a backend answer the score is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendReply {
    TokenProbs { prob_yes: f64, prob_no: f64 },
    LabelText { text: String },
}

impl BackendReply {
    pub fn validate(&self) -> Result<(), BackendError> {
        if let BackendReply::TokenProbs { prob_yes, prob_no } = *self {
            let ok = prob_yes.is_finite()
                && prob_no.is_finite()
                && prob_yes >= 0.0
                && prob_no >= 0.0
                && prob_yes + prob_no <= 1.0 + 1e-9;
            if !ok {
                return Err(BackendError::Malformed(format!(
                    "invalid Yes/No probabilities ({prob_yes}, {prob_no})"
                )));
            }
        }
        Ok(())
    }
}

/// Sums the probability mass of tokens that match an alias once surrounding
/// whitespace is stripped. Matching is case-sensitive.
pub fn alias_mass(tokens: &[TokenProb], aliases: &BTreeSet<String>) -> f64 {
    tokens
        .iter()
        .filter(|t| aliases.contains(t.token.trim()))
        .map(|t| t.prob)
        .sum()
}

/// Asks `backend` for whatever it can report about `prompt`.
pub fn query(backend: &dyn Backend, prompt: &str, cfg: &ScoringConfig) -> Result<BackendReply, BackendError> {
    let reply = match backend.capability() {
        Capability::TokenProbs => {
            let tokens = backend.next_token_probs(prompt)?;
            BackendReply::TokenProbs {
                prob_yes: alias_mass(&tokens, &cfg.yes_aliases),
                prob_no: alias_mass(&tokens, &cfg.no_aliases),
            }
        }
        Capability::LabelText => BackendReply::LabelText {
            text: backend.generate(prompt, 1)?,
        },
    };
    reply.validate()?;
    Ok(reply)
}

/// Bounded retries with exponential backoff for transport failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    pub fn no_delay() -> Self {
        Self {
            base_delay: Duration::ZERO,
            ..Self::default()
        }
    }

    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T, BackendError>) -> Result<T, BackendError> {
        let attempts = self.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            match op() {
                Err(e) if e.is_retryable() && attempt + 1 < attempts => {
                    let delay = self.base_delay * 2u32.pow(attempt);
                    log::debug!("retrying after {e} (attempt {}/{attempts})", attempt + 1);
                    if !delay.is_zero() {
                        thread::sleep(delay);
                    }
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

type Responder = dyn Fn(&str) -> Result<BackendReply, BackendError> + Send + Sync;

/// In-process backend driven by a closure, with a call counter. Used by the
/// tests, the examples and offline CLI runs.
pub struct MockBackend {
    id: String,
    capability: Capability,
    responder: Box<Responder>,
    calls: AtomicUsize,
}

impl std::fmt::Debug for MockBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MockBackend")
            .field("id", &self.id)
            .field("capability", &self.capability)
            .field("calls", &self.calls())
            .finish()
    }
}

impl MockBackend {
    pub fn new(
        id: impl Into<String>,
        capability: Capability,
        responder: impl Fn(&str) -> Result<BackendReply, BackendError> + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            capability,
            responder: Box::new(responder),
            calls: AtomicUsize::new(0),
        }
    }

    /// Replies with fixed `(P(Yes), P(No))` computed from the prompt.
    pub fn token_probs(
        id: impl Into<String>,
        f: impl Fn(&str) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self::new(id, Capability::TokenProbs, move |p| {
            let (prob_yes, prob_no) = f(p);
            Ok(BackendReply::TokenProbs { prob_yes, prob_no })
        })
    }

    /// Replies with generated text only.
    pub fn label_text(id: impl Into<String>, f: impl Fn(&str) -> String + Send + Sync + 'static) -> Self {
        Self::new(id, Capability::LabelText, move |p| Ok(BackendReply::LabelText { text: f(p) }))
    }

    /// Number of backend calls served so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn respond(&self, prompt: &str) -> Result<BackendReply, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        (self.responder)(prompt)
    }
}

impl Backend for MockBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn capability(&self) -> Capability {
        self.capability
    }

    fn next_token_probs(&self, prompt: &str) -> Result<Vec<TokenProb>, BackendError> {
        match self.respond(prompt)? {
            BackendReply::TokenProbs { prob_yes, prob_no } => {
                Ok(vec![TokenProb::new("Yes", prob_yes), TokenProb::new("No", prob_no)])
            }
            BackendReply::LabelText { .. } => Err(BackendError::Unsupported(
                "mock configured for generated text".into(),
            )),
        }
    }

    fn generate(&self, prompt: &str, _max_tokens: usize) -> Result<String, BackendError> {
        match self.respond(prompt)? {
            BackendReply::LabelText { text } => Ok(text),
            BackendReply::TokenProbs { prob_yes, prob_no } => {
                Ok(if prob_yes >= prob_no { "Yes" } else { "No" }.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_mass_strips_whitespace_and_is_case_sensitive() {
        let tokens = vec![
            TokenProb::new(" Yes", 0.4),
            TokenProb::new("Yes", 0.1),
            TokenProb::new("YES", 0.2),
            TokenProb::new("No", 0.05),
        ];
        let yes: BTreeSet<String> = ["Yes".to_string()].into();
        assert!((alias_mass(&tokens, &yes) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn retry_stops_on_malformed() {
        let mut n = 0;
        let r: Result<(), _> = RetryPolicy::no_delay().run(|| {
            n += 1;
            Err(BackendError::Malformed("x".into()))
        });
        assert!(r.is_err());
        assert_eq!(n, 1);
    }

    #[test]
    fn retry_bounded_on_transport() {
        let mut n = 0;
        let r: Result<(), _> = RetryPolicy::no_delay().run(|| {
            n += 1;
            Err(BackendError::Transport("down".into()))
        });
        assert!(r.is_err());
        assert_eq!(n, 3);

        let mut m = 0;
        let ok = RetryPolicy::no_delay().run(|| {
            m += 1;
            if m < 3 {
                Err(BackendError::Transport("flaky".into()))
            } else {
                Ok(m)
            }
        });
        assert_eq!(ok, Ok(3));
    }

    #[test]
    fn reply_validation() {
        assert!(BackendReply::TokenProbs { prob_yes: 0.6, prob_no: 0.5 }.validate().is_err());
        assert!(BackendReply::TokenProbs { prob_yes: -0.1, prob_no: 0.5 }.validate().is_err());
        assert!(BackendReply::TokenProbs { prob_yes: 0.5, prob_no: 0.5 }.validate().is_ok());
    }
}
