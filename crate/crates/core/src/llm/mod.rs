//! Chat-completion backends, tagged-code extraction and token counting.

mod extract;
pub(crate) mod http;
mod scripted;
mod tokens;

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub use extract::{extract_tagged_code, tagged_blocks};
pub use http::RetryPolicy;
pub use scripted::{message_digest, FixtureRecord, ScriptedBackend};
pub use tokens::{count_tokens, truncate_tokens, TokenCounter, WhitespaceCounter};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("network error after {attempts} attempts: {message}")]
    Network { attempts: u32, message: String },
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("no fixture response for digest {digest}")]
    FixtureMiss { digest: String },
    #[error("cannot load fixture {path}: {message}")]
    Fixture { path: String, message: String },
    #[error("no tagged or fenced code block found")]
    NoCodeFound,
    #[error("tag `{0}` is not a bare identifier")]
    InvalidTag(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend profile: {0}")]
    Profile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
            Role::Tool => "tool",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
            tool_call_id: None,
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
            tool_call_id: None,
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
            tool_call_id: None,
        }
    }

    pub fn tool(call_id: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            role: Role::Tool,
            content: content.into(),
            tool_call_id: Some(call_id.into()),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.role != Role::Tool || self.tool_call_id.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodingParams {
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default)]
    pub max_new_tokens: Option<u32>,
}

fn default_temperature() -> f64 {
    0.6
}
fn default_top_p() -> f64 {
    1.0
}

impl Default for DecodingParams {
    fn default() -> Self {
        Self {
            temperature: default_temperature(),
            top_p: default_top_p(),
            max_new_tokens: None,
        }
    }
}

impl DecodingParams {
    /// Returns the offending field name and a message on failure.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(("temperature", "must be a finite value >= 0".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(("top_p", "must lie in (0, 1]".into()));
        }
        if self.max_new_tokens == Some(0) {
            return Err(("max_new_tokens", "must be positive when set".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub prompt_tokens: usize,
    pub completion_tokens: usize,
    pub backend_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// OpenAI-compatible HTTP endpoint.
    Http,
    /// Fixture file keyed by message digest; `model_id` is the fixture path.
    Scripted,
    /// Local feature-hashing embedder (embeddings only).
    Hashing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendProfile {
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint_url: Option<String>,
    #[serde(default)]
    pub model_id: String,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_request_timeout")]
    pub request_timeout_secs: u64,
    /// Vector width for the hashing embedder.
    #[serde(default)]
    pub dimensions: Option<usize>,
}

fn default_key_env() -> String {
    "HDLMEND_API_KEY".into()
}
fn default_request_timeout() -> u64 {
    300
}

impl BackendProfile {
    pub fn default_chat() -> Self {
        Self {
            kind: BackendKind::Http,
            endpoint_url: Some("http://127.0.0.1:8080/v1/chat/completions".into()),
            model_id: "Qwen/Qwen3-30B-A3B".into(),
            api_key_env: "HDLMEND_API_KEY".into(),
            request_timeout_secs: default_request_timeout(),
            dimensions: None,
        }
    }

    pub fn default_embedding() -> Self {
        Self {
            kind: BackendKind::Http,
            endpoint_url: Some("http://127.0.0.1:7997/embeddings".into()),
            model_id: "BAAI/bge-small-en-v1.5".into(),
            api_key_env: "HDLMEND_EMBED_KEY".into(),
            request_timeout_secs: 60,
            dimensions: None,
        }
    }

    pub fn scripted(fixture: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Scripted,
            endpoint_url: None,
            model_id: fixture.into(),
            api_key_env: default_key_env(),
            request_timeout_secs: default_request_timeout(),
            dimensions: None,
        }
    }

    pub fn hashing(dimensions: usize) -> Self {
        Self {
            kind: BackendKind::Hashing,
            endpoint_url: None,
            model_id: format!("hashing-{dimensions}"),
            api_key_env: "HDLMEND_EMBED_KEY".into(),
            request_timeout_secs: default_request_timeout(),
            dimensions: Some(dimensions),
        }
    }

    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        match self.kind {
            BackendKind::Http => {
                if self.endpoint_url.as_deref().map_or(true, |u| u.trim().is_empty()) {
                    return Err(("endpoint_url", "required for http backends".into()));
                }
            }
            BackendKind::Scripted => {
                if self.model_id.trim().is_empty() {
                    return Err(("model_id", "scripted backends need a fixture path".into()));
                }
            }
            BackendKind::Hashing => {
                if self.dimensions == Some(0) {
                    return Err(("dimensions", "must be positive".into()));
                }
            }
        }
        if self.request_timeout_secs == 0 {
            return Err(("request_timeout_secs", "must be positive".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.request_timeout_secs)
    }

    /// API key read from `api_key_env`, if set.
    pub fn api_key(&self) -> Option<String> {
        std::env::var(&self.api_key_env).ok().filter(|k| !k.is_empty())
    }

    /// Short model name safe for directory names.
    pub fn short_model_name(&self) -> String {
        let base = match self.kind {
            BackendKind::Scripted => Path::new(&self.model_id)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.model_id.clone()),
            _ => self
                .model_id
                .rsplit('/')
                .next()
                .unwrap_or(&self.model_id)
                .to_string(),
        };
        base.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
            .collect()
    }
}

/// A chat model. Implementations must not mutate shared state visible to callers.
pub trait ChatBackend: Send + Sync {
    /// `seed` is a per-call value derived from the run seed; backends may ignore it.
    fn complete(
        &self,
        messages: &[ChatMessage],
        decoding: &DecodingParams,
        seed: u64,
    ) -> Result<Completion, LlmError>;

    fn id(&self) -> String;
}

fn check_messages(messages: &[ChatMessage]) -> Result<(), LlmError> {
    if messages.is_empty() {
        return Err(LlmError::InvalidRequest("message list is empty".into()));
    }
    if let Some(m) = messages.iter().find(|m| !m.is_valid()) {
        return Err(LlmError::InvalidRequest(format!(
            "{} message without tool_call_id",
            m.role.as_str()
        )));
    }
    Ok(())
}

/// OpenAI-compatible chat-completions client.
pub struct HttpChatBackend {
    profile: BackendProfile,
    client: http::JsonClient,
}

impl HttpChatBackend {
    pub fn new(profile: BackendProfile) -> Result<Self, LlmError> {
        profile
            .validate()
            .map_err(|(f, m)| LlmError::Profile(format!("{f}: {m}")))?;
        let client = http::JsonClient::new(profile.timeout());
        Ok(Self { profile, client })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.client.retry = retry;
        self
    }

    fn url(&self) -> &str {
        self.profile.endpoint_url.as_deref().unwrap_or_default()
    }

    /// Request body in the chat-completions wire shape.
    pub fn request_body(&self, messages: &[ChatMessage], decoding: &DecodingParams) -> serde_json::Value {
        let msgs: Vec<_> = messages
            .iter()
            .map(|m| {
                let mut v = json!({"role": m.role.as_str(), "content": m.content});
                if let Some(id) = &m.tool_call_id {
                    v["tool_call_id"] = json!(id);
                }
                v
            })
            .collect();
        let mut body = json!({
            "model": self.profile.model_id,
            "messages": msgs,
            "temperature": decoding.temperature,
            "top_p": decoding.top_p,
        });
        if let Some(max) = decoding.max_new_tokens {
            body["max_tokens"] = json!(max);
        }
        body
    }
}

impl ChatBackend for HttpChatBackend {
    fn complete(
        &self,
        messages: &[ChatMessage],
        decoding: &DecodingParams,
        _seed: u64,
    ) -> Result<Completion, LlmError> {
        check_messages(messages)?;
        let body = self.request_body(messages, decoding);
        let key = self.profile.api_key();
        let value = self.client.post(self.url(), key.as_deref(), &body)?;
        let text = value["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| LlmError::BadResponse("missing choices[0].message.content".into()))?
            .to_string();
        let prompt_tokens = value["usage"]["prompt_tokens"]
            .as_u64()
            .map(|n| n as usize)
            .unwrap_or_else(|| messages.iter().map(|m| count_tokens(&m.content)).sum());
        let completion_tokens = value["usage"]["completion_tokens"]
            .as_u64()
            .map(|n| n as usize)
            .unwrap_or_else(|| count_tokens(&text));
        Ok(Completion {
            text,
            prompt_tokens,
            completion_tokens,
            backend_id: self.id(),
        })
    }

    fn id(&self) -> String {
        format!("http:{}", self.profile.model_id)
    }
}

/// Adapter turning a closure into a backend; handy for tests and embedding.
pub struct FnBackend<F>(pub F);

impl<F> ChatBackend for FnBackend<F>
where
    F: Fn(&[ChatMessage]) -> Result<String, LlmError> + Send + Sync,
{
    fn complete(
        &self,
        messages: &[ChatMessage],
        _decoding: &DecodingParams,
        _seed: u64,
    ) -> Result<Completion, LlmError> {
        check_messages(messages)?;
        let text = (self.0)(messages)?;
        Ok(Completion {
            prompt_tokens: messages.iter().map(|m| count_tokens(&m.content)).sum(),
            completion_tokens: count_tokens(&text),
            text,
            backend_id: self.id(),
        })
    }

    fn id(&self) -> String {
        "fn".into()
    }
}

/// Builds the chat backend described by `profile`.
pub fn build_chat_backend(profile: &BackendProfile) -> Result<Box<dyn ChatBackend>, LlmError> {
    match profile.kind {
        BackendKind::Http => Ok(Box::new(HttpChatBackend::new(profile.clone())?)),
        BackendKind::Scripted => Ok(Box::new(ScriptedBackend::load(Path::new(&profile.model_id))?)),
        BackendKind::Hashing => Err(LlmError::Profile(
            "the hashing backend cannot serve chat completions".into(),
        )),
    }
}

/// One-shot completion against the backend described by `profile`.
pub fn complete(
    backend: &BackendProfile,
    messages: &[ChatMessage],
    decoding: &DecodingParams,
) -> Result<Completion, LlmError> {
    build_chat_backend(backend)?.complete(messages, decoding, 0)
}
