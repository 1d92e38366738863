use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::RetrievalError;
use crate::llm::http::JsonClient;
use crate::llm::{BackendKind, BackendProfile, LlmError, RetryPolicy};

/// Source of raw (unnormalized) embedding vectors.
pub trait EmbeddingBackend: Send + Sync {
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, LlmError>;
    fn id(&self) -> String;
}

/// `POST {model, input: [text]}` → `{data: [{embedding: [...]}]}`.
pub struct HttpEmbedder {
    profile: BackendProfile,
    client: JsonClient,
}

impl HttpEmbedder {
    pub fn new(profile: BackendProfile) -> Result<Self, LlmError> {
        profile
            .validate()
            .map_err(|(f, m)| LlmError::Profile(format!("{f}: {m}")))?;
        let client = JsonClient::new(profile.timeout());
        Ok(Self { profile, client })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.client.retry = retry;
        self
    }
}

impl EmbeddingBackend for HttpEmbedder {
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, LlmError> {
        let body = json!({"model": self.profile.model_id, "input": [text]});
        let url = self.profile.endpoint_url.as_deref().unwrap_or_default();
        let key = self.profile.api_key();
        let value = self.client.post(url, key.as_deref(), &body)?;
        value["data"][0]["embedding"]
            .as_array()
            .ok_or_else(|| LlmError::BadResponse("missing data[0].embedding".into()))?
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| LlmError::BadResponse("non-numeric embedding entry".into()))
            })
            .collect()
    }

    fn id(&self) -> String {
        format!("http:{}", self.profile.model_id)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingRecord {
    #[serde(default)]
    digest: Option<String>,
    #[serde(default)]
    text: Option<String>,
    embedding: Vec<f64>,
}

/// Fixture-backed embedder keyed by SHA-256 of the input text.
pub struct ScriptedEmbedder {
    vectors: HashMap<String, Vec<f64>>,
    source: String,
}

pub fn text_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl ScriptedEmbedder {
    pub fn from_pairs<S: AsRef<str>>(pairs: impl IntoIterator<Item = (S, Vec<f64>)>) -> Self {
        Self {
            vectors: pairs
                .into_iter()
                .map(|(t, v)| (text_digest(t.as_ref()), v))
                .collect(),
            source: "inline".into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let err = |message: String| LlmError::Fixture {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let records: Vec<EmbeddingRecord> =
            serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        let mut vectors = HashMap::new();
        for (i, r) in records.into_iter().enumerate() {
            let key = match (r.digest, r.text) {
                (Some(d), _) => d,
                (None, Some(t)) => text_digest(&t),
                (None, None) => return Err(err(format!("record {i} has neither digest nor text"))),
            };
            vectors.insert(key, r.embedding);
        }
        Ok(Self {
            vectors,
            source: path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        })
    }
}

impl EmbeddingBackend for ScriptedEmbedder {
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, LlmError> {
        let digest = text_digest(text);
        self.vectors
            .get(&digest)
            .cloned()
            .ok_or(LlmError::FixtureMiss { digest })
    }

    fn id(&self) -> String {
        format!("scripted:{}", self.source)
    }
}

/// Deterministic bag-of-identifiers embedder using signed feature hashing.
///
/// Not a semantic model; it lets offline runs retrieve exemplars that share
/// identifiers (library names, types, keywords) with the query.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    pub dims: usize,
}

impl HashingEmbedder {
    pub const DEFAULT_DIMS: usize = 256;

    fn fnv1a(bytes: &[u8]) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

impl EmbeddingBackend for HashingEmbedder {
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, LlmError> {
        let mut v = vec![0.0; self.dims];
        let lower = text.to_ascii_lowercase();
        for word in lower
            .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .filter(|w| !w.is_empty())
        {
            let h = Self::fnv1a(word.as_bytes());
            let slot = (h % self.dims as u64) as usize;
            let sign = if (h >> 63) == 1 { -1.0 } else { 1.0 };
            v[slot] += sign;
        }
        Ok(v)
    }

    fn id(&self) -> String {
        format!("hashing-{}", self.dims)
    }
}

/// Normalizing wrapper that learns the embedding width from its first response.
pub struct EmbeddingClient {
    backend: Box<dyn EmbeddingBackend>,
    dim: OnceLock<usize>,
}

impl EmbeddingClient {
    pub fn new(backend: Box<dyn EmbeddingBackend>) -> Self {
        Self {
            backend,
            dim: OnceLock::new(),
        }
    }

    /// Pins the expected width, e.g. to match a loaded index.
    pub fn with_dim(self, dim: usize) -> Self {
        let _ = self.dim.set(dim);
        self
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim.get().copied()
    }

    pub fn id(&self) -> String {
        self.backend.id()
    }

    /// Returns the L2-normalized vector for `text`.
    pub fn embed_document(&self, text: &str) -> Result<Vec<f64>, RetrievalError> {
        let raw = self.backend.embed_raw(text)?;
        let expected = *self.dim.get_or_init(|| raw.len());
        if raw.len() != expected {
            return Err(RetrievalError::DimensionMismatch {
                expected,
                got: raw.len(),
            });
        }
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(RetrievalError::DegenerateEmbedding);
        }
        Ok(raw.into_iter().map(|x| x / norm).collect())
    }
}

pub fn build_embedder(profile: &BackendProfile) -> Result<EmbeddingClient, LlmError> {
    let backend: Box<dyn EmbeddingBackend> = match profile.kind {
        BackendKind::Http => Box::new(HttpEmbedder::new(profile.clone())?),
        BackendKind::Scripted => Box::new(ScriptedEmbedder::load(Path::new(&profile.model_id))?),
        BackendKind::Hashing => Box::new(HashingEmbedder {
            dims: profile.dimensions.unwrap_or(HashingEmbedder::DEFAULT_DIMS),
        }),
    };
    Ok(EmbeddingClient::new(backend))
}

/// Embeds one document through `client`, normalizing the result.
pub fn embed_document(client: &EmbeddingClient, text: &str) -> Result<Vec<f64>, RetrievalError> {
    client.embed_document(text)
}
