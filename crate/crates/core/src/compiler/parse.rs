use std::sync::LazyLock;

use regex::Regex;

use super::{KeywordTable, RawCompilerOutput};
use crate::model::{Diagnostic, Severity};

// <file>:<line>:<col>:[severity:] <message>
static DIAGNOSTIC_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^(?P<file>[^:\s][^:]*):(?P<line>\d+):(?P<col>\d+):\s*(?:(?P<sev>(?i:error|warning|note|fatal))\s*:)?\s*(?P<msg>.*?)\s*$",
    )
    .unwrap()
});

/// Lines that did not match the diagnostic grammar, kept for transcripts.
pub fn unparsed_lines(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && parse_line(l, KeywordTable::bundled()).is_none())
        .map(str::to_string)
        .collect()
}

fn parse_line(line: &str, table: &KeywordTable) -> Option<Diagnostic> {
    let caps = DIAGNOSTIC_LINE.captures(line.trim_end_matches('\r'))?;
    let line_no: u32 = caps["line"].parse().ok()?;
    let col: u32 = caps["col"].parse().ok()?;
    let severity = match caps.name("sev").map(|m| m.as_str().to_ascii_lowercase()) {
        Some(s) if s == "warning" || s == "note" => Severity::Warning,
        _ => Severity::Error,
    };
    let message = caps["msg"].to_string();
    Some(Diagnostic {
        file: caps["file"].to_string(),
        line: line_no.max(1),
        column: col.max(1),
        severity,
        category: table.classify(&message),
        message,
    })
}

/// Line-local parse of compiler text. Unknown lines are skipped.
pub fn parse_diagnostic_text(text: &str, table: &KeywordTable) -> Vec<Diagnostic> {
    text.lines().filter_map(|l| parse_line(l, table)).collect()
}

/// Parses the stderr of a syntax-check run with the bundled keyword table.
pub fn parse_diagnostics(raw: &RawCompilerOutput) -> Vec<Diagnostic> {
    parse_diagnostic_text(&raw.stderr, KeywordTable::bundled())
}
