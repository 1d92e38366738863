//! Shared domain types for the repair loop.

mod config;
mod dataset;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{
    config_from_str, parse_config, CompilerConfig, CompilerKind, ConfigError, RunConfig,
    VerifierConfig, VerifierMode, CONFIG_VERSION,
};
pub use dataset::{load_dataset, validate_dataset, CaseEntry, DatasetError, DatasetManifest};

/// The four repair policies compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Fixed loop driven by a long expert-written prompt.
    Expert,
    /// Planner/generator agent with gated retrieval.
    Mcp,
    /// Expert loop with exemplars appended on every iteration.
    NaiveRag,
    /// Agent flow with one retrieval whose exemplars persist across attempts.
    Hybrid,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Expert,
        PolicyKind::Mcp,
        PolicyKind::NaiveRag,
        PolicyKind::Hybrid,
    ];

    /// Stable serialized name.
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Expert => "expert",
            PolicyKind::Mcp => "mcp",
            PolicyKind::NaiveRag => "naive_rag",
            PolicyKind::Hybrid => "hybrid",
        }
    }

    /// Column heading used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Expert => "Non-MCP",
            PolicyKind::Mcp => "MCP",
            PolicyKind::NaiveRag => "Non-MCP+RAG",
            PolicyKind::Hybrid => "Hybrid",
        }
    }

    pub fn uses_retrieval(self) -> bool {
        !matches!(self, PolicyKind::Expert)
    }

    /// Policies that split each attempt into a planner and a clean-context generator.
    pub fn is_agentic(self) -> bool {
        matches!(self, PolicyKind::Mcp | PolicyKind::Hybrid)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "expert" => Ok(PolicyKind::Expert),
            "mcp" => Ok(PolicyKind::Mcp),
            "naive_rag" => Ok(PolicyKind::NaiveRag),
            "hybrid" => Ok(PolicyKind::Hybrid),
            other => Err(format!(
                "unknown policy `{other}` (expected expert, mcp, naive_rag or hybrid)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Dataset,
    Repaired,
}

/// One broken VHDL translation under repair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub case_id: String,
    pub index: usize,
    pub vhdl_text: String,
    pub provenance: Provenance,
}

/// A benchmark function and its K candidate translations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionCase {
    pub id: String,
    pub name: String,
    pub candidates: Vec<Candidate>,
    pub source_ref: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// Coarse classification of a compiler message.
///
/// The first five variants are the categories that fire conditional retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    MissingLibrary,
    MissingUse,
    MissingType,
    MissingPort,
    MissingProcess,
    Other,
}

impl ErrorCategory {
    pub const TRIGGERS: [ErrorCategory; 5] = [
        ErrorCategory::MissingLibrary,
        ErrorCategory::MissingUse,
        ErrorCategory::MissingType,
        ErrorCategory::MissingPort,
        ErrorCategory::MissingProcess,
    ];

    pub fn is_retrieval_trigger(self) -> bool {
        !matches!(self, ErrorCategory::Other)
    }
}

/// A single structured compiler message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub severity: Severity,
    pub message: String,
    pub category: ErrorCategory,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}:{}:{}: {}",
            self.file, self.line, self.column, sev, self.message
        )
    }
}

/// Result of one syntax check. `pass` holds exactly when no Error diagnostic is present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub diagnostics: Vec<Diagnostic>,
    pub pass: bool,
}

impl DiagnosticReport {
    pub fn new(diagnostics: Vec<Diagnostic>) -> Self {
        let pass = !diagnostics.iter().any(Diagnostic::is_error);
        Self { diagnostics, pass }
    }

    pub fn passing() -> Self {
        Self::new(Vec::new())
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn error_count(&self) -> usize {
        self.errors().count()
    }

    pub fn has_trigger_category(&self) -> bool {
        self.errors().any(|d| d.category.is_retrieval_trigger())
    }

    /// Error diagnostics rendered one per line, in report order.
    pub fn render_errors(&self) -> String {
        self.errors()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgressSignal {
    Improved,
    NoProgress,
    NoBaseline,
}

/// Compares Error counts of consecutive reports. Warnings are ignored.
pub fn assess_progress(prev: Option<&DiagnosticReport>, curr: &DiagnosticReport) -> ProgressSignal {
    match prev {
        None => ProgressSignal::NoBaseline,
        Some(prev) if curr.error_count() < prev.error_count() => ProgressSignal::Improved,
        Some(_) => ProgressSignal::NoProgress,
    }
}

/// Outcome of the downstream verifier for a syntactically passing candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SimPass,
    SimFail,
    Unavailable,
}

/// What one candidate repair produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub final_vhdl: String,
    pub syntax_pass: bool,
    pub iterations_used: u32,
    pub tool_call_count: u32,
    pub transcript_path: Option<PathBuf>,
}
