//! Offline stand-in for GHDL.
//!
//! A handful of structural rules that cover the idioms the repair loop cares
//! about (library and use clauses, the common IEEE types, process blocks and
//! bracket balance). It emits GHDL-style text which then goes through the same
//! parser as real compiler output. It is not a VHDL parser.

use std::path::Path;
use std::sync::LazyLock;
use std::time::{Duration, Instant};

use regex::Regex;

use super::{
    empty_unit_output, parse_diagnostic_text, unparsed_lines, CheckOutput, CompilerError,
    KeywordTable, RawCompilerOutput, SyntaxChecker, CANDIDATE_FILE,
};
use crate::model::DiagnosticReport;

const STD_LOGIC_NAMES: &[&str] = &[
    "std_logic",
    "std_logic_vector",
    "std_ulogic",
    "std_ulogic_vector",
    "rising_edge",
    "falling_edge",
];

const NUMERIC_STD_NAMES: &[&str] = &[
    "unsigned",
    "signed",
    "to_unsigned",
    "to_signed",
    "to_integer",
    "resize",
    "shift_left",
    "shift_right",
];

static LIBRARY_IEEE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*library\s+([\w\s,]*\bieee\b[\w\s,]*);").unwrap());
static USE_IEEE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^\s*use\s+(ieee)\.").unwrap());
static USE_1164: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*use\s+ieee\.std_logic_1164\.").unwrap());
static USE_NUMERIC: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*use\s+ieee\.numeric_std\.").unwrap());
static PROCESS_HEAD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:\w+\s*:\s*)?(?:postponed\s+)?process\b").unwrap());
static PROCESS_END: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*end\s+(?:postponed\s+)?process\b").unwrap());
static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z_][A-Za-z0-9_]*").unwrap());

#[derive(Debug, Clone, Default)]
pub struct MockChecker {
    table: Option<KeywordTable>,
}

impl MockChecker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_table(table: KeywordTable) -> Self {
        Self { table: Some(table) }
    }

    /// Produces GHDL-formatted stderr for `vhdl`.
    pub fn diagnose(&self, vhdl: &str) -> String {
        let lines: Vec<String> = vhdl.lines().map(strip_comment).collect();
        let mut out = Vec::new();
        let mut emit = |line: usize, col: usize, msg: String| {
            out.push(format!("{CANDIDATE_FILE}:{}:{}:error: {msg}", line + 1, col + 1));
        };

        let has_library = lines.iter().any(|l| LIBRARY_IEEE.is_match(l));
        let has_1164 = lines.iter().any(|l| USE_1164.is_match(l));
        let has_numeric = lines.iter().any(|l| USE_NUMERIC.is_match(l));

        if !has_library {
            if let Some((i, caps)) = lines
                .iter()
                .enumerate()
                .find_map(|(i, l)| USE_IEEE.captures(l).map(|c| (i, c)))
            {
                let col = caps.get(1).map_or(0, |m| m.start());
                emit(i, col, "no declaration for \"ieee\"".into());
            }
        }

        let is_use_or_library = |l: &str| {
            let t = l.trim_start().to_ascii_lowercase();
            t.starts_with("use ") || t.starts_with("library ")
        };
        for (names, present) in [(STD_LOGIC_NAMES, has_1164), (NUMERIC_STD_NAMES, has_numeric)] {
            if present {
                continue;
            }
            let mut seen = Vec::new();
            for (i, l) in lines.iter().enumerate() {
                if is_use_or_library(l) {
                    continue;
                }
                for m in WORD.find_iter(l) {
                    let w = m.as_str().to_ascii_lowercase();
                    if names.contains(&w.as_str()) && !seen.contains(&w) {
                        emit(i, m.start(), format!("no declaration for \"{w}\""));
                        seen.push(w);
                    }
                }
            }
        }

        let mut open: Vec<usize> = Vec::new();
        for (i, l) in lines.iter().enumerate() {
            if PROCESS_END.is_match(l) {
                open.pop();
            } else if PROCESS_HEAD.is_match(l) {
                open.push(i);
            }
        }
        for i in open {
            emit(
                i,
                0,
                format!("missing \"end process\" for process started at line {}", i + 1),
            );
        }

        let opens: usize = lines.iter().map(|l| l.matches('(').count()).sum();
        let closes: usize = lines.iter().map(|l| l.matches(')').count()).sum();
        if opens != closes {
            let last = lines.len().saturating_sub(1);
            emit(
                last,
                0,
                format!("unbalanced parentheses: {opens} '(' against {closes} ')'"),
            );
        }

        let mut text = out.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        text
    }
}

/// Drops a trailing `--` comment, ignoring dashes inside string literals.
fn strip_comment(line: &str) -> String {
    let mut in_string = false;
    let bytes = line.as_bytes();
    for i in 0..bytes.len() {
        match bytes[i] {
            b'"' => in_string = !in_string,
            b'-' if !in_string && bytes.get(i + 1) == Some(&b'-') => {
                return line[..i].to_string();
            }
            _ => {}
        }
    }
    line.to_string()
}

impl SyntaxChecker for MockChecker {
    fn check(&self, vhdl: &str, _workdir: &Path) -> Result<CheckOutput, CompilerError> {
        if vhdl.trim().is_empty() {
            return Ok(empty_unit_output());
        }
        let started = Instant::now();
        let stderr = self.diagnose(vhdl);
        let table = self.table.as_ref().unwrap_or_else(|| KeywordTable::bundled());
        let report = DiagnosticReport::new(parse_diagnostic_text(&stderr, table));
        let raw = RawCompilerOutput {
            exit_code: if report.pass { 0 } else { 1 },
            stdout: String::new(),
            stderr,
            duration: started.elapsed().min(Duration::from_secs(1)),
        };
        Ok(CheckOutput {
            unparsed: unparsed_lines(&raw.stderr),
            report,
            raw,
        })
    }

    fn id(&self) -> String {
        "mock".to_string()
    }
}
