//! Prompt templates for every model turn.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::llm::{tagged_blocks, ChatMessage, TokenCounter};
use crate::model::DiagnosticReport;
use crate::retrieval::ExemplarBlock;

pub const BUNDLED_EXPERT_PROMPT: &str = include_str!("../../assets/expert_prompt.txt");

/// Token cap on a planner's instruction list plus rationale.
pub const INSTRUCTION_TOKEN_CAP: usize = 400;

pub const CODE_TAG: &str = "code";

pub const PLANNER_SYSTEM: &str = "You analyse VHDL-2008 syntax errors reported by GHDL and plan a repair. \
Do not write code. Reply with a short list of concrete edit directives, one per line, inside \
<instructions></instructions>, followed by a one or two sentence <rationale></rationale>. \
If reference examples would help you may ask for them with <tool>RetrieveExamples</tool>.";

pub const GENERATOR_SYSTEM: &str = "You rewrite VHDL-2008 design units. Apply the given edit \
directives to the unit and return the complete rewritten unit inside <code></code> tags.";

pub const SUMMARY_SYSTEM: &str = "You write terse notes about repair attempts.";

static TOOL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)<tool>\s*(.*?)\s*</tool>").expect("tool regex"));

/// Planner output handed to the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionList {
    pub instructions: Vec<String>,
    pub rationale: String,
}

fn strip_bullet(line: &str) -> Option<&str> {
    let t = line.trim();
    let rest = t
        .strip_prefix("- ")
        .or_else(|| t.strip_prefix("* "))
        .or_else(|| {
            let digits = t.find(|c: char| !c.is_ascii_digit())?;
            (digits > 0)
                .then(|| t[digits..].strip_prefix(". ").or_else(|| t[digits..].strip_prefix(") ")))
                .flatten()
        })?;
    let rest = rest.trim();
    (!rest.is_empty()).then_some(rest)
}

impl InstructionList {
    /// Reads `<instructions>` bullets (or any bullet lines, or the whole reply
    /// as one directive) and `<rationale>`. `None` when nothing usable remains.
    pub fn parse(text: &str) -> Option<Self> {
        let without_tools = TOOL_RE.replace_all(text, "");
        let rationale = tagged_blocks(&without_tools, "rationale")
            .last()
            .map(|s| s.trim().to_string())
            .unwrap_or_default();
        let body = match tagged_blocks(&without_tools, "instructions").last() {
            Some(b) => b.to_string(),
            None => {
                let mut t = without_tools.to_string();
                if let Some(i) = t.to_ascii_lowercase().find("<rationale>") {
                    t.truncate(i);
                }
                t
            }
        };
        let bullets: Vec<String> = body.lines().filter_map(strip_bullet).map(str::to_string).collect();
        let instructions = if bullets.is_empty() {
            let lines: Vec<String> = body
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect();
            if lines.is_empty() {
                return None;
            }
            vec![lines.join(" ")]
        } else {
            bullets
        };
        Some(Self {
            instructions,
            rationale,
        })
    }

    pub fn token_count(&self, counter: &dyn TokenCounter) -> usize {
        self.instructions.iter().map(|i| counter.count(i)).sum::<usize>() + counter.count(&self.rationale)
    }

    /// Cuts the rationale first, then trailing directives, until within `cap`.
    pub fn enforce_cap(&mut self, counter: &dyn TokenCounter, cap: usize) {
        let instr: usize = self.instructions.iter().map(|i| counter.count(i)).sum();
        if instr + counter.count(&self.rationale) <= cap {
            return;
        }
        self.rationale = counter.truncate(&self.rationale, cap.saturating_sub(instr)).to_string();
        let mut remaining = cap;
        let mut kept = Vec::new();
        for i in &self.instructions {
            let n = counter.count(i);
            if n <= remaining {
                kept.push(i.clone());
                remaining -= n;
            } else {
                if remaining > 0 {
                    kept.push(counter.truncate(i, remaining).to_string());
                }
                break;
            }
        }
        self.instructions = kept;
    }

    pub fn render(&self) -> String {
        let mut out: Vec<String> = self.instructions.iter().map(|i| format!("- {i}")).collect();
        if !self.rationale.is_empty() {
            out.push(format!("Rationale: {}", self.rationale));
        }
        out.join("\n")
    }
}

/// Tool names requested with `<tool>Name</tool>`.
pub fn requested_tools(text: &str) -> Vec<String> {
    TOOL_RE.captures_iter(text).map(|c| c[1].to_string()).collect()
}

/// Code with right-aligned line numbers, e.g. `  7 | end process;`.
pub fn numbered(code: &str) -> String {
    let lines: Vec<&str> = code.lines().collect();
    let width = lines.len().max(1).to_string().len();
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{:>width$} | {l}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

fn exemplar_section(block: Option<&ExemplarBlock>) -> String {
    match block {
        Some(b) if !b.is_empty() => format!(
            "\n\nReference examples (complete units that pass GHDL):\n<examples>\n{}\n</examples>",
            b.rendered_text
        ),
        _ => String::new(),
    }
}

/// Fixed-loop prompt: guidance asset, code, errors and optional exemplars.
pub fn expert_messages(asset: &str, code: &str, report: &DiagnosticReport, exemplars: Option<&ExemplarBlock>) -> Vec<ChatMessage> {
    let user = format!(
        "Current VHDL unit:\n<code>\n{code}\n</code>\n\nGHDL errors:\n{}{}\n\nReturn the complete corrected unit inside <code></code> tags.",
        report.render_errors(),
        exemplar_section(exemplars)
    );
    vec![ChatMessage::system(asset.trim_end()), ChatMessage::user(user)]
}

pub fn planner_messages(
    code: &str,
    report: &DiagnosticReport,
    prev_summary: Option<&str>,
    exemplars: Option<&ExemplarBlock>,
) -> Vec<ChatMessage> {
    let summary = prev_summary
        .map(|s| format!("\n\nPrevious attempt: {s}"))
        .unwrap_or_default();
    let user = format!(
        "Goal: make this unit pass GHDL analysis with --std=08 without changing its behaviour.\n\nCode (line numbers are not part of the source):\n{}\n\nGHDL errors:\n{}{summary}{}",
        numbered(code),
        report.render_errors(),
        exemplar_section(exemplars)
    );
    vec![ChatMessage::system(PLANNER_SYSTEM), ChatMessage::user(user)]
}

/// Clean context: nothing but the current code and the instruction list.
pub fn generator_messages(code: &str, instructions: &InstructionList) -> Vec<ChatMessage> {
    let user = format!(
        "Edit directives:\n{}\n\nVHDL unit:\n<code>\n{code}\n</code>",
        instructions.render()
    );
    vec![ChatMessage::system(GENERATOR_SYSTEM), ChatMessage::user(user)]
}

pub fn summary_messages(
    iteration: u32,
    action: &str,
    errors_before: usize,
    after: &DiagnosticReport,
    budget: usize,
) -> Vec<ChatMessage> {
    let user = format!(
        "Summarize repair attempt {iteration} in at most {budget} words: what was tried and which errors remain.\n\nTried:\n{action}\n\nErrors before: {errors_before}\nErrors after: {}\n{}",
        after.error_count(),
        after.render_errors()
    );
    vec![ChatMessage::system(SUMMARY_SYSTEM), ChatMessage::user(user)]
}

/// Deterministic summary used when the model call fails.
pub fn fallback_summary(iteration: u32, report: &DiagnosticReport) -> String {
    format!("iteration {iteration}: {} errors remain", report.error_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::WhitespaceCounter;

    #[test]
    fn parses_tagged_plan() {
        let text = "<tool>RetrieveExamples</tool>\n<instructions>\n- add `library ieee;`\n- add the use clause\n</instructions>\n<rationale>std_logic is undeclared</rationale>";
        let plan = InstructionList::parse(text).unwrap();
        assert_eq!(plan.instructions, ["add `library ieee;`", "add the use clause"]);
        assert_eq!(plan.rationale, "std_logic is undeclared");
        assert_eq!(requested_tools(text), ["RetrieveExamples"]);
    }

    #[test]
    fn untagged_plans() {
        let plan = InstructionList::parse("1. close the process\n2) fix the port list").unwrap();
        assert_eq!(plan.instructions, ["close the process", "fix the port list"]);
        let plan = InstructionList::parse("just add the\nlibrary clause").unwrap();
        assert_eq!(plan.instructions, ["just add the library clause"]);
        assert!(InstructionList::parse("  \n <tool>X</tool> ").is_none());
    }

    #[test]
    fn cap_cuts_rationale_first() {
        let c = WhitespaceCounter;
        let mut plan = InstructionList {
            instructions: vec!["a b c".into(), "d e".into()],
            rationale: vec!["r"; 500].join(" "),
        };
        plan.enforce_cap(&c, 400);
        assert_eq!(plan.instructions.len(), 2);
        assert_eq!(plan.token_count(&c), 400);
        let mut plan = InstructionList {
            instructions: vec![vec!["x"; 300].join(" "), vec!["y"; 300].join(" ")],
            rationale: "why".into(),
        };
        plan.enforce_cap(&c, 400);
        assert_eq!(plan.rationale, "");
        assert_eq!(plan.token_count(&c), 400);
    }

    #[test]
    fn numbered_lines() {
        let code = (1..=10).map(|i| format!("l{i}")).collect::<Vec<_>>().join("\n");
        let n = numbered(&code);
        assert!(n.starts_with(" 1 | l1\n"));
        assert!(n.ends_with("10 | l10"));
    }

    #[test]
    fn expert_prompt_carries_asset_and_errors() {
        let report = DiagnosticReport::passing();
        let m = expert_messages(BUNDLED_EXPERT_PROMPT, "entity e is end;", &report, None);
        assert!(m[0].content.contains("## Diagnostic-fix recipes"));
        assert!(m[1].content.contains("entity e is end;"));
    }
}
