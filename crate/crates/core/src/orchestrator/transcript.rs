//! Per-candidate transcript: every prompt, completion, tool call and report in order.
//!
//! Durations and timestamps are left out so identical runs give identical files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::prompts::InstructionList;
use super::tools::ToolCall;
use crate::llm::ChatMessage;
use crate::model::{DiagnosticReport, PolicyKind, ProgressSignal};
use crate::retrieval::ScoredDoc;

/// One model turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    /// `expert`, `planner`, `generator` or `summary`.
    pub stage: String,
    pub iteration: Option<u32>,
    pub messages: Vec<ChatMessage>,
    pub completion: String,
    pub prompt_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranscriptRecord {
    Precheck {
        report: DiagnosticReport,
    },
    Gate {
        iteration: u32,
        progress: ProgressSignal,
        trigger_category: bool,
        fired: bool,
    },
    Exchange(Exchange),
    Plan {
        iteration: u32,
        plan: InstructionList,
        requested_tools: Vec<String>,
    },
    ToolCall {
        iteration: Option<u32>,
        call: ToolCall,
    },
    /// Ranked hits behind an exemplar block. Scores stay out of prompts.
    Retrieval {
        iteration: u32,
        hits: Vec<ScoredDoc>,
        included_doc_ids: Vec<String>,
    },
    ToolResult {
        iteration: Option<u32>,
        call_id: String,
        payload: String,
        token_count: usize,
    },
    ToolFailure {
        iteration: Option<u32>,
        call_id: String,
        error: String,
    },
    Report {
        iteration: u32,
        report: DiagnosticReport,
        progress: ProgressSignal,
    },
    Summary {
        iteration: u32,
        text: String,
        fallback: bool,
    },
    Error {
        iteration: Option<u32>,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptOutcome {
    pub syntax_pass: bool,
    pub iterations_used: u32,
    pub tool_call_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub case_id: String,
    pub run_index: u32,
    pub candidate_index: u32,
    pub policy: PolicyKind,
    pub chat_backend: String,
    pub records: Vec<TranscriptRecord>,
    pub outcome: Option<TranscriptOutcome>,
}

impl Transcript {
    pub fn new(case_id: &str, run_index: u32, candidate_index: u32, policy: PolicyKind, chat_backend: String) -> Self {
        Self {
            case_id: case_id.to_string(),
            run_index,
            candidate_index,
            policy,
            chat_backend,
            records: Vec::new(),
            outcome: None,
        }
    }

    pub fn push(&mut self, record: TranscriptRecord) {
        self.records.push(record);
    }

    pub fn exchanges(&self) -> impl Iterator<Item = &Exchange> {
        self.records.iter().filter_map(|r| match r {
            TranscriptRecord::Exchange(e) => Some(e),
            _ => None,
        })
    }

    /// `<case>_r<run>_c<candidate>.json`, with path separators in the id replaced.
    pub fn file_name(&self) -> String {
        format!(
            "{}_r{}_c{}.json",
            self.case_id.replace(['/', '\\'], "_"),
            self.run_index,
            self.candidate_index
        )
    }

    pub fn save(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        let mut text = serde_json::to_string_pretty(self).expect("transcript serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}
