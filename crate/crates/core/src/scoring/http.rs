//! HTTP backend for OpenAI-style completion services.
//!
//! Completion mode: `POST {base}/completions` with
//! `{model, prompt, max_tokens: 1, logprobs: n, temperature: 0}`; the top-n
//! next-token log-probabilities are read from
//! `choices[0].logprobs.top_logprobs[0]`.
//!
//! Chat mode (label text only): `POST {base}/chat/completions` with
//! `{model, messages}`; the reply text is `choices[0].message.content`.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::backend::{Backend, BackendError, Capability, TokenProb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ApiMode {
    #[default]
    Completion,
    Chat,
}

#[derive(Debug, Clone)]
pub struct HttpBackend {
    id: String,
    base_url: String,
    model: String,
    mode: ApiMode,
    top_n: usize,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, mode: ApiMode) -> Self {
        let base_url = base_url.into().trim_end_matches('/').to_string();
        let model = model.into();
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        let mode_tag = match mode {
            ApiMode::Completion => "completion",
            ApiMode::Chat => "chat",
        };
        Self {
            id: format!("{mode_tag}:{model}@{base_url}"),
            base_url,
            model,
            mode,
            top_n: 5,
            api_key: None,
            agent,
        }
    }

    /// Number of alternatives requested per position.
    pub fn with_top_n(mut self, n: usize) -> Self {
        self.top_n = n.max(1);
        self
    }

    pub fn with_api_key(mut self, key: Option<String>) -> Self {
        self.api_key = key;
        self
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, BackendError> {
        let url = format!("{}/{}", self.base_url, path);
        let mut req = self.agent.post(&url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(classify_error)?;
        resp.body_mut()
            .read_json::<Value>()
            .map_err(|e| BackendError::Malformed(format!("response body: {e}")))
    }
}

fn classify_error(err: ureq::Error) -> BackendError {
    match err {
        ureq::Error::StatusCode(code) if code == 429 || code >= 500 => {
            BackendError::Transport(format!("HTTP {code}"))
        }
        ureq::Error::StatusCode(code) => BackendError::Malformed(format!("HTTP {code}")),
        other => BackendError::Transport(other.to_string()),
    }
}

fn first_choice(v: &Value) -> Result<&Value, BackendError> {
    v.get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| BackendError::Malformed("missing choices[0]".into()))
}

/// Extracts the first position's top log-probabilities as probabilities.
pub fn parse_completion_logprobs(v: &Value) -> Result<Vec<TokenProb>, BackendError> {
    let top = first_choice(v)?
        .pointer("/logprobs/top_logprobs/0")
        .and_then(Value::as_object)
        .ok_or_else(|| BackendError::Malformed("missing logprobs.top_logprobs[0]".into()))?;
    // BTreeMap for a deterministic token order
    let sorted: BTreeMap<&String, &Value> = top.iter().collect();
    sorted
        .into_iter()
        .map(|(token, lp)| {
            let lp = lp
                .as_f64()
                .ok_or_else(|| BackendError::Malformed(format!("non-numeric logprob for {token:?}")))?;
            Ok(TokenProb::new(token.clone(), lp.exp()))
        })
        .collect()
}

pub fn parse_completion_text(v: &Value) -> Result<String, BackendError> {
    first_choice(v)?
        .get("text")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::Malformed("missing choices[0].text".into()))
}

pub fn parse_chat_text(v: &Value) -> Result<String, BackendError> {
    first_choice(v)?
        .pointer("/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::Malformed("missing choices[0].message.content".into()))
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn capability(&self) -> Capability {
        match self.mode {
            ApiMode::Completion => Capability::TokenProbs,
            ApiMode::Chat => Capability::LabelText,
        }
    }

    fn next_token_probs(&self, prompt: &str) -> Result<Vec<TokenProb>, BackendError> {
        if self.mode == ApiMode::Chat {
            return Err(BackendError::Unsupported("chat endpoint exposes no token probabilities".into()));
        }
        let body = json!({
            "model": self.model,
            "prompt": prompt,
            "max_tokens": 1,
            "logprobs": self.top_n,
            "temperature": 0,
        });
        parse_completion_logprobs(&self.post("completions", &body)?)
    }

    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String, BackendError> {
        match self.mode {
            ApiMode::Completion => {
                let body = json!({
                    "model": self.model,
                    "prompt": prompt,
                    "max_tokens": max_tokens,
                    "temperature": 0,
                });
                parse_completion_text(&self.post("completions", &body)?)
            }
            ApiMode::Chat => {
                let body = json!({
                    "model": self.model,
                    "messages": [{"role": "user", "content": prompt}],
                    "max_tokens": max_tokens,
                    "temperature": 0,
                });
                parse_chat_text(&self.post("chat/completions", &body)?)
            }
        }
    }
}
