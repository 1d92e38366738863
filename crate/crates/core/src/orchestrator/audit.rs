//! Append-only JSON-lines log of every tool call, generation and code diff.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diff::{apply_patch, PatchError};

/// Tool field value for plain model turns.
pub const GENERATION: &str = "generation";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub timestamp: String,
    pub case_id: String,
    pub run_index: u32,
    pub candidate_index: u32,
    /// `None` for the syntax pre-check that precedes iteration 0.
    pub iteration: Option<u32>,
    /// Tool name, or `generation` for model turns.
    pub tool: String,
    /// Which model turn (`expert`, `planner`, `summary`, ...) for generations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub call_id: String,
    pub input_digest: String,
    pub output_digest: String,
    /// Unified diff from the previous to the new VHDL when the code changed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fields of an entry supplied by the caller; sequence number and timestamp
/// are assigned by the log.
#[derive(Debug, Clone, Default)]
pub struct AuditRecord {
    pub case_id: String,
    pub run_index: u32,
    pub candidate_index: u32,
    pub iteration: Option<u32>,
    pub tool: String,
    pub stage: Option<String>,
    pub call_id: String,
    pub input_digest: String,
    pub output_digest: String,
    pub diff: Option<String>,
    pub error: Option<String>,
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

struct Inner {
    next_seq: u64,
    file: Option<File>,
    entries: Vec<AuditEntry>,
}

/// Thread-safe log; each append writes one complete line under the lock.
pub struct AuditLog {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl AuditLog {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            inner: Mutex::new(Inner {
                next_seq: 0,
                file: None,
                entries: Vec::new(),
            }),
        }
    }

    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(Inner {
                next_seq: 0,
                file: Some(file),
                entries: Vec::new(),
            }),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn append(&self, record: AuditRecord) -> io::Result<AuditEntry> {
        let mut inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        let entry = AuditEntry {
            seq: inner.next_seq,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            case_id: record.case_id,
            run_index: record.run_index,
            candidate_index: record.candidate_index,
            iteration: record.iteration,
            tool: record.tool,
            stage: record.stage,
            call_id: record.call_id,
            input_digest: record.input_digest,
            output_digest: record.output_digest,
            diff: record.diff,
            error: record.error,
        };
        if let Some(file) = inner.file.as_mut() {
            let mut line = serde_json::to_string(&entry).expect("audit entry serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
        }
        inner.next_seq += 1;
        inner.entries.push(entry.clone());
        Ok(entry)
    }

    /// Entries appended through this handle, in sequence order.
    pub fn entries(&self) -> Vec<AuditEntry> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).entries.clone()
    }

    /// Entries of one trial.
    pub fn trial_entries(&self, case_id: &str, run_index: u32, candidate_index: u32) -> Vec<AuditEntry> {
        self.entries()
            .into_iter()
            .filter(|e| e.case_id == case_id && e.run_index == run_index && e.candidate_index == candidate_index)
            .collect()
    }
}

/// Reads an audit file back.
pub fn read_audit(path: &Path) -> io::Result<Vec<AuditEntry>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1))
        })?;
        out.push(entry);
    }
    Ok(out)
}

/// Rebuilds a trial's final code by applying its diffs in sequence order.
pub fn replay_diffs<'a>(
    initial: &str,
    entries: impl IntoIterator<Item = &'a AuditEntry>,
) -> Result<String, PatchError> {
    let mut sorted: Vec<&AuditEntry> = entries.into_iter().filter(|e| e.diff.is_some()).collect();
    sorted.sort_by_key(|e| e.seq);
    let mut code = initial.to_string();
    for e in sorted {
        code = apply_patch(&code, e.diff.as_deref().unwrap_or_default())?;
    }
    Ok(code)
}
