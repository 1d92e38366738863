use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use regex::{Regex, RegexBuilder};
use serde::Deserialize;

use super::{ExemplarBlock, RetrievalError, ScoredDoc, VectorIndex};
use crate::llm::{TokenCounter, WhitespaceCounter};
use crate::model::DiagnosticReport;

/// Leading code tokens appended to the error text when building a query.
pub const QUERY_CODE_TOKENS: usize = 200;

const BUNDLED_TIERS: &str = include_str!("../../data/tiers.json");

static DEFAULT_TIERS: LazyLock<TierTable> =
    LazyLock::new(|| TierTable::from_json(BUNDLED_TIERS).expect("bundled tier table"));

#[derive(Debug, Deserialize)]
struct TierFile {
    version: u32,
    #[serde(default)]
    #[allow(dead_code)]
    comment: Option<String>,
    line_tiers: Vec<LineTierFile>,
    #[serde(default)]
    regions: Vec<RegionFile>,
    default_tier: u32,
}

#[derive(Debug, Deserialize)]
struct LineTierFile {
    tier: u32,
    patterns: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RegionFile {
    tier: u32,
    start: String,
    end: String,
}

#[derive(Debug, Clone)]
struct Region {
    tier: u32,
    start: Regex,
    end: Regex,
}

/// Line priorities used when an exemplar has to be cut to fit the budget.
///
/// Lower tier numbers survive longer.
#[derive(Debug, Clone)]
pub struct TierTable {
    line_tiers: Vec<(u32, Regex)>,
    regions: Vec<Region>,
    default_tier: u32,
}

fn compile(pattern: &str) -> Result<Regex, RetrievalError> {
    RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|e| RetrievalError::TierTable(e.to_string()))
}

impl TierTable {
    pub fn bundled() -> &'static TierTable {
        &DEFAULT_TIERS
    }

    pub fn from_json(text: &str) -> Result<Self, RetrievalError> {
        let file: TierFile =
            serde_json::from_str(text).map_err(|e| RetrievalError::TierTable(e.to_string()))?;
        if file.version != 1 {
            return Err(RetrievalError::TierTable(format!(
                "unsupported tier table version {}",
                file.version
            )));
        }
        let mut line_tiers = Vec::new();
        for lt in file.line_tiers {
            for p in lt.patterns {
                line_tiers.push((lt.tier, compile(&p)?));
            }
        }
        let regions = file
            .regions
            .into_iter()
            .map(|r| {
                Ok(Region {
                    tier: r.tier,
                    start: compile(&r.start)?,
                    end: compile(&r.end)?,
                })
            })
            .collect::<Result<_, RetrievalError>>()?;
        Ok(Self {
            line_tiers,
            regions,
            default_tier: file.default_tier,
        })
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let text = fs::read_to_string(path).map_err(|source| RetrievalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Tier of every line of `text`, in line order.
    pub fn line_tiers(&self, text: &str) -> Vec<u32> {
        let lines: Vec<&str> = text.lines().collect();
        let mut tiers: Vec<u32> = lines
            .iter()
            .map(|line| {
                self.line_tiers
                    .iter()
                    .filter(|(_, re)| re.is_match(line))
                    .map(|(t, _)| *t)
                    .min()
                    .unwrap_or(self.default_tier)
            })
            .collect();
        for region in &self.regions {
            let mut open = false;
            for (i, line) in lines.iter().enumerate() {
                if !open && region.start.is_match(line) {
                    open = true;
                } else if open && region.end.is_match(line) {
                    tiers[i] = tiers[i].min(region.tier);
                    open = false;
                    continue;
                }
                if open {
                    tiers[i] = tiers[i].min(region.tier);
                }
            }
        }
        tiers
    }
}

/// Retrieval query: the current error lines, a blank line, then the leading
/// code tokens.
pub fn compose_query(report: &DiagnosticReport, code: &str) -> String {
    let code_head = crate::llm::truncate_tokens(code, QUERY_CODE_TOKENS);
    format!("{}\n\n{}", report.render_errors(), code_head)
}

/// Renders hits under `budget` with the bundled tiers and whitespace tokens.
pub fn format_exemplars(index: &VectorIndex, hits: &[ScoredDoc], budget: usize) -> ExemplarBlock {
    format_exemplars_with(index, hits, budget, TierTable::bundled(), &WhitespaceCounter)
}

/// Whole documents are included by descending score while they fit. The first
/// document that does not fit is cut down to its highest-priority lines (kept
/// in source order) and rendering stops there.
pub fn format_exemplars_with(
    index: &VectorIndex,
    hits: &[ScoredDoc],
    budget: usize,
    tiers: &TierTable,
    counter: &dyn TokenCounter,
) -> ExemplarBlock {
    let mut seen = HashSet::new();
    let mut ordered: Vec<&ScoredDoc> = hits.iter().filter(|h| seen.insert(h.doc_id.as_str())).collect();
    ordered.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));

    let mut parts: Vec<String> = Vec::new();
    let mut ids = Vec::new();
    let joined = |parts: &[String], extra: Option<&str>| {
        let mut all: Vec<&str> = parts.iter().map(String::as_str).collect();
        all.extend(extra);
        all.join("\n\n")
    };

    for hit in ordered {
        let Some(doc) = index.doc(&hit.doc_id) else {
            log::warn!("hit `{}` not present in index", hit.doc_id);
            continue;
        };
        let text = doc.text.trim_end();
        if text.trim().is_empty() {
            continue;
        }
        if counter.count(&joined(&parts, Some(text))) <= budget {
            parts.push(text.to_string());
            ids.push(doc.id.clone());
            continue;
        }
        if let Some(cut) = truncate_doc(text, tiers, counter, |candidate| {
            counter.count(&joined(&parts, Some(candidate))) <= budget
        }) {
            parts.push(cut);
            ids.push(doc.id.clone());
        }
        break;
    }

    let rendered_text = joined(&parts, None);
    ExemplarBlock {
        token_count: counter.count(&rendered_text),
        rendered_text,
        included_doc_ids: ids,
    }
}

/// Longest prefix of the (tier, line) priority order whose rendering fits.
fn truncate_doc(
    text: &str,
    tiers: &TierTable,
    counter: &dyn TokenCounter,
    fits: impl Fn(&str) -> bool,
) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let line_tiers = tiers.line_tiers(text);
    let mut order: Vec<usize> = (0..lines.len()).filter(|&i| !lines[i].trim().is_empty()).collect();
    order.sort_by_key(|&i| (line_tiers[i], i));

    let render = |keep: &[usize]| {
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.iter().map(|&i| lines[i]).collect::<Vec<_>>().join("\n")
    };

    let mut best = None;
    for n in 1..=order.len() {
        let candidate = render(&order[..n]);
        if counter.count(&candidate) == 0 {
            continue;
        }
        if !fits(&candidate) {
            break;
        }
        best = Some(candidate);
    }
    best
}
