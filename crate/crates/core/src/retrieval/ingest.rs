use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{ExemplarDoc, RetrievalError};
use crate::llm::count_tokens;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub docs: Vec<ExemplarDoc>,
    /// Files that could not be read, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
    /// `(duplicate id, kept id)` pairs removed by exact-text deduplication.
    pub duplicates: Vec<(String, String)>,
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), RetrievalError> {
    let entries = fs::read_dir(dir).map_err(|source| RetrievalError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries.flatten() {
        let path = entry.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else if matches!(
            path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
            Some("vhd" | "vhdl")
        ) {
            out.push(path);
        }
    }
    Ok(())
}

/// One document per `.vhd`/`.vhdl` file under `dir`, ids from relative paths.
///
/// Files are never chunked. Documents whose text is byte-identical to an
/// earlier one (in id order) are dropped.
pub fn ingest_corpus(dir: &Path) -> Result<IngestReport, RetrievalError> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    if files.is_empty() {
        return Err(RetrievalError::EmptyCorpus(dir.to_path_buf()));
    }
    let mut with_ids: Vec<(String, PathBuf)> = files
        .into_iter()
        .map(|p| {
            let rel = p.strip_prefix(dir).unwrap_or(&p);
            let id = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            (id, p)
        })
        .collect();
    with_ids.sort();

    let mut report = IngestReport::default();
    let mut seen: HashMap<[u8; 32], String> = HashMap::new();
    for (id, path) in with_ids {
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                report.skipped.push((path, e.to_string()));
                continue;
            }
        };
        let hash: [u8; 32] = Sha256::digest(text.as_bytes()).into();
        if let Some(kept) = seen.get(&hash) {
            report.duplicates.push((id, kept.clone()));
            continue;
        }
        seen.insert(hash, id.clone());
        report.docs.push(ExemplarDoc {
            token_count: count_tokens(&text),
            id,
            text,
            source_path: path,
            embedding: Vec::new(),
        });
    }
    if report.docs.is_empty() {
        return Err(RetrievalError::EmptyCorpus(dir.to_path_buf()));
    }
    Ok(report)
}
