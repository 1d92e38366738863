//! Dataset layout: `<root>/<case_id>/candidate_<i>.vhd`, optional `reference.m`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Candidate, FunctionCase, Provenance, RunConfig};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset directory not found: {0}")]
    NotFound(PathBuf),
    #[error("no cases found in {0}")]
    NoCases(PathBuf),
    #[error("case `{case}` has no candidate files")]
    ZeroCandidates { case: String },
    #[error("case `{case}` has {found} candidates, expected {expected}")]
    CandidateCount {
        case: String,
        found: usize,
        expected: usize,
    },
    #[error("case `{case}` is missing candidate_{index}.vhd")]
    MissingCandidate { case: String, index: usize },
    #[error("case `{case}`: candidate_{index}.vhd is empty")]
    EmptyCandidate { case: String, index: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseEntry {
    pub id: String,
    pub candidate_count: usize,
}

/// Summary of a validated dataset. Cases are ordered by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub cases: Vec<CaseEntry>,
    pub total_cases: usize,
    /// SHA-256 over every candidate file name and its bytes.
    pub content_hash: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn candidate_index(file_name: &str) -> Option<usize> {
    file_name
        .strip_prefix("candidate_")?
        .strip_suffix(".vhd")?
        .parse()
        .ok()
}

/// Validates the layout and returns the manifest.
pub fn validate_dataset(dir: &Path, cfg: &RunConfig) -> Result<DatasetManifest, DatasetError> {
    load_dataset(dir, cfg).map(|(manifest, _)| manifest)
}

/// Loads every case, enforcing exactly `candidates_per_function` candidates each.
pub fn load_dataset(
    dir: &Path,
    cfg: &RunConfig,
) -> Result<(DatasetManifest, Vec<FunctionCase>), DatasetError> {
    if !dir.is_dir() {
        return Err(DatasetError::NotFound(dir.to_path_buf()));
    }
    let expected = cfg.candidates_per_function as usize;

    let mut case_dirs = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.is_dir() {
            case_dirs.insert(entry.file_name().to_string_lossy().into_owned(), path);
        }
    }
    if case_dirs.is_empty() {
        return Err(DatasetError::NoCases(dir.to_path_buf()));
    }

    let mut hasher = Sha256::new();
    let mut entries = Vec::with_capacity(case_dirs.len());
    let mut cases = Vec::with_capacity(case_dirs.len());
    for (id, case_dir) in case_dirs {
        let mut files = BTreeMap::new();
        for entry in fs::read_dir(&case_dir).map_err(io_err(&case_dir))? {
            let entry = entry.map_err(io_err(&case_dir))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(index) = candidate_index(&name) {
                files.insert(index, entry.path());
            }
        }
        if files.is_empty() {
            return Err(DatasetError::ZeroCandidates { case: id });
        }
        if files.len() != expected {
            return Err(DatasetError::CandidateCount {
                case: id,
                found: files.len(),
                expected,
            });
        }
        let mut candidates = Vec::with_capacity(expected);
        for index in 0..expected {
            let path = files
                .get(&index)
                .ok_or_else(|| DatasetError::MissingCandidate {
                    case: id.clone(),
                    index,
                })?;
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            if text.trim().is_empty() {
                return Err(DatasetError::EmptyCandidate {
                    case: id.clone(),
                    index,
                });
            }
            hasher.update(id.as_bytes());
            hasher.update([0]);
            hasher.update(format!("candidate_{index}.vhd").as_bytes());
            hasher.update([0]);
            hasher.update(text.as_bytes());
            hasher.update([0]);
            candidates.push(Candidate {
                case_id: id.clone(),
                index,
                vhdl_text: text,
                provenance: Provenance::Dataset,
            });
        }
        let reference = case_dir.join("reference.m");
        entries.push(CaseEntry {
            id: id.clone(),
            candidate_count: candidates.len(),
        });
        cases.push(FunctionCase {
            name: id.clone(),
            id,
            candidates,
            source_ref: reference.is_file().then_some(reference),
        });
    }

    let manifest = DatasetManifest {
        root: dir.to_path_buf(),
        total_cases: entries.len(),
        cases: entries,
        content_hash: hex::encode(hasher.finalize()),
    };
    Ok((manifest, cases))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_case(root: &Path, id: &str, n: usize) {
        let dir = root.join(id);
        fs::create_dir_all(&dir).unwrap();
        for i in 0..n {
            fs::write(
                dir.join(format!("candidate_{i}.vhd")),
                format!("entity e{i} is end;\n"),
            )
            .unwrap();
        }
    }

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn well_formed_dataset_of_42_cases() {
        let tmp = tempfile::tempdir().unwrap();
        for i in (0..42).rev() {
            write_case(tmp.path(), &format!("fn_{i:02}"), 3);
        }
        let manifest = validate_dataset(tmp.path(), &cfg()).unwrap();
        assert_eq!(manifest.total_cases, 42);
        let ids: Vec<_> = manifest.cases.iter().map(|c| c.id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn candidate_count_mismatch_names_case() {
        let tmp = tempfile::tempdir().unwrap();
        write_case(tmp.path(), "good", 3);
        write_case(tmp.path(), "short", 2);
        let err = validate_dataset(tmp.path(), &cfg()).unwrap_err();
        assert!(matches!(err, DatasetError::CandidateCount { ref case, found: 2, expected: 3 } if case == "short"));
        assert!(err.to_string().contains("short"));
    }

    #[test]
    fn empty_directory_has_no_cases() {
        let tmp = tempfile::tempdir().unwrap();
        let err = validate_dataset(tmp.path(), &cfg()).unwrap_err();
        assert!(err.to_string().contains("no cases found"));
    }

    #[test]
    fn zero_candidates_and_gaps() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("empty_case")).unwrap();
        assert!(matches!(
            validate_dataset(tmp.path(), &cfg()).unwrap_err(),
            DatasetError::ZeroCandidates { .. }
        ));

        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("gap");
        fs::create_dir_all(&dir).unwrap();
        for i in [0, 1, 3] {
            fs::write(dir.join(format!("candidate_{i}.vhd")), "x").unwrap();
        }
        assert!(matches!(
            validate_dataset(tmp.path(), &cfg()).unwrap_err(),
            DatasetError::MissingCandidate { index: 2, .. }
        ));
    }

    #[test]
    fn hash_tracks_candidate_contents() {
        let tmp = tempfile::tempdir().unwrap();
        write_case(tmp.path(), "a", 3);
        let h1 = validate_dataset(tmp.path(), &cfg()).unwrap().content_hash;
        fs::write(tmp.path().join("a/reference.m"), "function y = f(x)").unwrap();
        let h2 = validate_dataset(tmp.path(), &cfg()).unwrap().content_hash;
        assert_eq!(h1, h2);
        fs::write(tmp.path().join("a/candidate_1.vhd"), "entity changed is end;").unwrap();
        let h3 = validate_dataset(tmp.path(), &cfg()).unwrap().content_hash;
        assert_ne!(h1, h3);
    }

    #[test]
    fn load_returns_candidates_in_index_order() {
        let tmp = tempfile::tempdir().unwrap();
        write_case(tmp.path(), "c", 3);
        let (_, cases) = load_dataset(tmp.path(), &cfg()).unwrap();
        let idx: Vec<_> = cases[0].candidates.iter().map(|c| c.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
        assert!(cases[0].candidates[2].vhdl_text.contains("e2"));
    }
}
