//! Candidate, function and macro-level rates, and the report renderer.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{PolicyKind, Verdict};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("case `{case_id}`: incomplete trial grid, expected {expected} outcomes, got {got}")]
    IncompleteGrid {
        case_id: String,
        expected: usize,
        got: usize,
    },
    #[error("case `{case_id}`: duplicate outcome for run {run_index} candidate {candidate_index}")]
    DuplicateTrial {
        case_id: String,
        run_index: u32,
        candidate_index: u32,
    },
    #[error("case `{case_id}`: run {run_index} candidate {candidate_index} outside the R×K grid")]
    OutOfGrid {
        case_id: String,
        run_index: u32,
        candidate_index: u32,
    },
    #[error("case `{0}`: outcome has a verdict or submission without a syntax pass")]
    Inconsistent(String),
    #[error("no functions to average")]
    Empty,
}

/// One trial: a single candidate of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub case_id: String,
    pub run_index: u32,
    pub candidate_index: u32,
    pub syntax_pass: bool,
    pub submitted_to_verifier: bool,
    pub verdict: Verdict,
    #[serde(default)]
    pub iterations_used: u32,
    #[serde(default)]
    pub tool_call_count: u32,
}

impl CandidateOutcome {
    fn is_consistent(&self) -> bool {
        (!self.submitted_to_verifier || self.syntax_pass)
            && (self.verdict != Verdict::SimPass || self.submitted_to_verifier)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionMetrics {
    pub case_id: String,
    pub candidate_pass_rate: f64,
    pub function_syntax_rate: f64,
    pub reach_rate: f64,
    pub final_success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroReport {
    pub policy: PolicyKind,
    pub model_id: String,
    pub candidate_pass: f64,
    pub function_syntax: f64,
    pub reach: f64,
    pub final_success: f64,
    pub function_count: usize,
    pub runs: u32,
    pub candidates: u32,
    #[serde(default)]
    pub per_function: Vec<FunctionMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
}

/// Row labels in report order.
pub const ROW_LABELS: [&str; 4] = [
    "Candidate-level syntax pass",
    "Function-level syntax pass",
    "Reach testbench",
    "Final success",
];

fn check_grid(outcomes: &[CandidateOutcome], runs: u32, candidates: u32) -> Result<(), MetricsError> {
    let case_id = outcomes.first().map(|o| o.case_id.clone()).unwrap_or_default();
    let expected = (runs * candidates) as usize;
    let mut seen = BTreeSet::new();
    for o in outcomes {
        if o.run_index >= runs || o.candidate_index >= candidates {
            return Err(MetricsError::OutOfGrid {
                case_id: o.case_id.clone(),
                run_index: o.run_index,
                candidate_index: o.candidate_index,
            });
        }
        if !seen.insert((o.run_index, o.candidate_index)) {
            return Err(MetricsError::DuplicateTrial {
                case_id: o.case_id.clone(),
                run_index: o.run_index,
                candidate_index: o.candidate_index,
            });
        }
        if !o.is_consistent() {
            return Err(MetricsError::Inconsistent(o.case_id.clone()));
        }
    }
    if outcomes.len() != expected || expected == 0 {
        return Err(MetricsError::IncompleteGrid {
            case_id,
            expected,
            got: outcomes.len(),
        });
    }
    Ok(())
}

/// Fraction of the R×K trials of one case that reached a syntax pass.
pub fn candidate_pass_rate(outcomes: &[CandidateOutcome], runs: u32, candidates: u32) -> Result<f64, MetricsError> {
    check_grid(outcomes, runs, candidates)?;
    let passes = outcomes.iter().filter(|o| o.syntax_pass).count();
    Ok(passes as f64 / outcomes.len() as f64)
}

/// Per-run "any candidate" booleans, averaged over the runs.
pub fn function_rates(outcomes: &[CandidateOutcome], runs: u32, candidates: u32) -> Result<FunctionMetrics, MetricsError> {
    let p = candidate_pass_rate(outcomes, runs, candidates)?;
    let mut per_run = vec![(false, false, false); runs as usize];
    for o in outcomes {
        let slot = &mut per_run[o.run_index as usize];
        slot.0 |= o.syntax_pass;
        slot.1 |= o.submitted_to_verifier;
        slot.2 |= o.verdict == Verdict::SimPass;
    }
    let mean = |f: fn(&(bool, bool, bool)) -> bool| {
        per_run.iter().filter(|r| f(r)).count() as f64 / runs as f64
    };
    Ok(FunctionMetrics {
        case_id: outcomes[0].case_id.clone(),
        candidate_pass_rate: p,
        function_syntax_rate: mean(|r| r.0),
        reach_rate: mean(|r| r.1),
        final_success_rate: mean(|r| r.2),
    })
}

/// Unweighted mean of each rate across functions.
pub fn macro_means(
    policy: PolicyKind,
    model_id: &str,
    per_function: &[FunctionMetrics],
    runs: u32,
    candidates: u32,
) -> Result<MacroReport, MetricsError> {
    if per_function.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = per_function.len() as f64;
    let mean = |f: fn(&FunctionMetrics) -> f64| per_function.iter().map(f).sum::<f64>() / n;
    Ok(MacroReport {
        policy,
        model_id: model_id.to_string(),
        candidate_pass: mean(|m| m.candidate_pass_rate),
        function_syntax: mean(|m| m.function_syntax_rate),
        reach: mean(|m| m.reach_rate),
        final_success: mean(|m| m.final_success_rate),
        function_count: per_function.len(),
        runs,
        candidates,
        per_function: per_function.to_vec(),
    })
}

/// Groups outcomes by case (sorted by id) and reduces them to a report.
pub fn compute_report(
    policy: PolicyKind,
    model_id: &str,
    outcomes: &[CandidateOutcome],
    runs: u32,
    candidates: u32,
) -> Result<MacroReport, MetricsError> {
    let mut by_case: BTreeMap<&str, Vec<CandidateOutcome>> = BTreeMap::new();
    for o in outcomes {
        by_case.entry(o.case_id.as_str()).or_default().push(o.clone());
    }
    let per_function = by_case
        .values()
        .map(|os| function_rates(os, runs, candidates))
        .collect::<Result<Vec<_>, _>>()?;
    macro_means(policy, model_id, &per_function, runs, candidates)
}

/// Percentage with one decimal, or two when one decimal would lose an exact
/// two-decimal value (0.3353 → "33.53%").
pub fn format_percent(rate: f64) -> String {
    let pct = rate * 100.0;
    let one = (pct * 10.0).round() / 10.0;
    let two = (pct * 100.0).round() / 100.0;
    if (pct - one).abs() > 1e-9 && (pct - two).abs() <= 1e-9 {
        format!("{two:.2}%")
    } else {
        format!("{one:.1}%")
    }
}

fn column_labels(reports: &[MacroReport]) -> Vec<String> {
    reports
        .iter()
        .map(|r| {
            let label = r.policy.label();
            let clashes = reports.iter().filter(|o| o.policy.label() == label).count() > 1;
            if clashes {
                format!("{label} [{}]", r.model_id)
            } else {
                label.to_string()
            }
        })
        .collect()
}

/// Table: a title line, a header line, then one line per metric with cells
/// separated by two spaces.
pub fn render_table(reports: &[MacroReport]) -> String {
    let mut models: Vec<&str> = Vec::new();
    for r in reports {
        if !models.contains(&r.model_id.as_str()) {
            models.push(&r.model_id);
        }
    }
    let mut out = String::new();
    if let Some(first) = reports.first() {
        out.push_str(&format!(
            "Function-level macro averages: model {}, {} functions, R={}, K={}\n",
            models.join(", "),
            first.function_count,
            first.runs,
            first.candidates
        ));
    }
    let mut header = vec!["Metric".to_string()];
    header.extend(column_labels(reports));
    out.push_str(&header.join("  "));
    out.push('\n');
    for (i, label) in ROW_LABELS.iter().enumerate() {
        let mut cells = vec![label.to_string()];
        cells.extend(reports.iter().map(|r| {
            format_percent(match i {
                0 => r.candidate_pass,
                1 => r.function_syntax,
                2 => r.reach,
                _ => r.final_success,
            })
        }));
        out.push_str(&cells.join("  "));
        out.push('\n');
    }
    out
}

pub fn render_report(reports: &[MacroReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(reports),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "reports": reports }))
                .expect("reports serialize");
            s.push('\n');
            s
        }
    }
}

/// Inverse of the JSON rendering.
pub fn parse_report_json(text: &str) -> Result<Vec<MacroReport>, serde_json::Error> {
    #[derive(Deserialize)]
    struct Doc {
        reports: Vec<MacroReport>,
    }
    serde_json::from_str::<Doc>(text).map(|d| d.reports)
}
