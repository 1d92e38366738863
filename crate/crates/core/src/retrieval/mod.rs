//! Whole-function exemplar retrieval: ingest, embed, exact top-k search and
//! budget-limited formatting.

mod embed;
mod format;
mod ingest;
mod search;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{LlmError, TokenCounter, WhitespaceCounter};

pub use embed::{
    build_embedder, embed_document, EmbeddingBackend, EmbeddingClient, HashingEmbedder,
    HttpEmbedder, ScriptedEmbedder,
};
pub use format::{compose_query, format_exemplars, format_exemplars_with, TierTable, QUERY_CODE_TOKENS};
pub use ingest::{ingest_corpus, IngestReport};
pub use search::search_topk;

pub const INDEX_FORMAT: &str = "hdl-mend-index";
pub const INDEX_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("empty corpus: no .vhd/.vhdl files under {0}")]
    EmptyCorpus(PathBuf),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("embedding has zero or non-finite norm")]
    DegenerateEmbedding,
    #[error("index is empty")]
    EmptyIndex,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("index file {path}: {message}")]
    IndexFormat { path: PathBuf, message: String },
    #[error("tier table: {0}")]
    TierTable(String),
    #[error("io error in {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Backend(#[from] LlmError),
}

/// One complete VHDL unit from the corpus; never a chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExemplarDoc {
    pub id: String,
    pub text: String,
    pub token_count: usize,
    pub source_path: PathBuf,
    /// Unit-norm vector; empty until embedded.
    #[serde(rename = "vector")]
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Budget-compliant rendering of retrieved exemplars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExemplarBlock {
    pub rendered_text: String,
    pub token_count: usize,
    pub included_doc_ids: Vec<String>,
}

impl ExemplarBlock {
    pub fn is_empty(&self) -> bool {
        self.included_doc_ids.is_empty()
    }
}

/// Exact inner-product index over unit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorIndex {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub embedder_id: String,
    pub built_at: String,
    pub docs: Vec<ExemplarDoc>,
}

impl VectorIndex {
    /// Assembles an index, checking dimensions, norms and id uniqueness.
    pub fn new(embedder_id: impl Into<String>, docs: Vec<ExemplarDoc>) -> Result<Self, RetrievalError> {
        let dim = docs.first().map_or(0, |d| d.embedding.len());
        let mut seen = std::collections::HashSet::new();
        for d in &docs {
            if d.embedding.len() != dim {
                return Err(RetrievalError::DimensionMismatch {
                    expected: dim,
                    got: d.embedding.len(),
                });
            }
            let norm: f64 = d.embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(RetrievalError::DegenerateEmbedding);
            }
            if !seen.insert(d.id.as_str()) {
                return Err(RetrievalError::DuplicateId(d.id.clone()));
            }
        }
        Ok(Self {
            format: INDEX_FORMAT.into(),
            version: INDEX_VERSION,
            dim,
            embedder_id: embedder_id.into(),
            built_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            docs,
        })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn doc(&self, id: &str) -> Option<&ExemplarDoc> {
        self.docs.iter().find(|d| d.id == id)
    }

    /// Writes the index atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<(), RetrievalError> {
        let io = |source| RetrievalError::Io {
            path: path.to_path_buf(),
            source,
        };
        let tmp = path.with_extension("json.partial");
        let json = serde_json::to_vec(self).expect("index serializes");
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&json)?;
            f.sync_all()?;
            fs::rename(&tmp, path)
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        result.map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let text = fs::read_to_string(path).map_err(|source| RetrievalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let bad = |message: String| RetrievalError::IndexFormat {
            path: path.to_path_buf(),
            message,
        };
        let index: VectorIndex = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if index.format != INDEX_FORMAT || index.version != INDEX_VERSION {
            return Err(bad(format!(
                "unsupported container {} v{}",
                index.format, index.version
            )));
        }
        if let Some(d) = index.docs.iter().find(|d| d.embedding.len() != index.dim) {
            return Err(bad(format!("doc `{}` has dimension {}", d.id, d.embedding.len())));
        }
        Ok(index)
    }
}

/// Index plus the machinery needed to query and format it.
pub struct Retriever {
    pub index: VectorIndex,
    pub embedder: EmbeddingClient,
    pub tiers: TierTable,
    pub counter: Box<dyn TokenCounter>,
}

impl Retriever {
    pub fn new(index: VectorIndex, embedder: EmbeddingClient) -> Self {
        Self {
            index,
            embedder,
            tiers: TierTable::bundled().clone(),
            counter: Box::new(WhitespaceCounter),
        }
    }

    pub fn with_tiers(mut self, tiers: TierTable) -> Self {
        self.tiers = tiers;
        self
    }

    /// Embeds `query` and returns the exact top-k hits.
    pub fn search(&self, query: &str, k: usize) -> Result<Vec<ScoredDoc>, RetrievalError> {
        if self.index.is_empty() {
            return Err(RetrievalError::EmptyIndex);
        }
        let q = self.embedder.embed_document(query)?;
        search_topk(&self.index, &q, k)
    }

    pub fn format(&self, hits: &[ScoredDoc], budget: usize) -> ExemplarBlock {
        format_exemplars_with(&self.index, hits, budget, &self.tiers, self.counter.as_ref())
    }
}

/// Ingests `corpus_dir` and embeds every document.
pub fn build_index(corpus_dir: &Path, embedder: &EmbeddingClient) -> Result<(VectorIndex, IngestReport), RetrievalError> {
    let mut report = ingest_corpus(corpus_dir)?;
    let mut docs = std::mem::take(&mut report.docs);
    for d in &mut docs {
        d.embedding = embedder.embed_document(&d.text)?;
    }
    let index = VectorIndex::new(embedder.id(), docs)?;
    Ok((index, report))
}
