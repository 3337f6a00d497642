//! Text-completion backends and the structured-output parsers used by the
//! prompted stages of the agent.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub mod fixture;
pub mod http;
pub mod parse;
pub mod template;

pub use fixture::{FixtureBackend, FixtureRecord, RecordingBackend};
pub use http::{ChatClient, Clock, HttpConfig, RateLimiter, SystemClock, Transport, TransportError};
pub use parse::{parse_behavior_pattern, parse_deliberation, render_canonical, ParseError, ParsedDeliberation};
pub use template::{render_template, Template, TemplateError, TemplateSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub request_id: String,
    /// Transcript key from [`cache_key`]; fixture lookups prefer it over the prompt hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_key: Option<String>,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, model: impl Into<String>) -> CompletionRequest {
        CompletionRequest {
            prompt: prompt.into(),
            model: model.into(),
            temperature: 0.0,
            max_tokens: 1024,
            request_id: String::new(),
            cache_key: None,
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.prompt.trim().is_empty() {
            return Err(LlmError::Config("empty prompt".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(LlmError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::Config("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CompletionResponse {
    pub text: String,
    pub prompt_tokens: Option<u32>,
    pub completion_tokens: Option<u32>,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(default)]
    pub provider: serde_json::Value,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("authentication failed (HTTP {0})")]
    Auth(u16),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("provider error (HTTP {status}): {body}")]
    Provider { status: u16, body: String },
    #[error("malformed provider payload: {0}")]
    Malformed(String),
    #[error("no recorded completion for key {key} (prompt sha256 {prompt_sha256})")]
    FixtureMiss { key: String, prompt_sha256: String },
    #[error("transcript {path}, line {line}: {message}")]
    Transcript { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that turns a prompt into a completion.
pub trait CompletionBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError>;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for Box<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        (**self).complete(request)
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Digest of a binding map, independent of insertion order.
pub fn bindings_digest(bindings: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (k, v) in bindings {
        h.update(k.as_bytes());
        h.update([0]);
        h.update(v.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

/// Transcript key of a templated request.
pub fn cache_key(template_id: &str, bindings: &BTreeMap<String, String>, model: &str, temperature: f64) -> String {
    let material = format!(
        "{template_id}\n{}\n{model}\n{temperature:?}",
        bindings_digest(bindings)
    );
    sha256_hex(material.as_bytes())
}
