//! The three-tool menu and its dispatcher.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::audit::{digest, AuditRecord};
use super::prompts::{generator_messages, InstructionList, CODE_TAG};
use super::transcript::Exchange;
use super::Services;
use crate::compiler::{report_or_synthetic, CheckOutput, CompilerError, CANDIDATE_FILE};
use crate::diff::unified_diff;
use crate::llm::{extract_tagged_code, LlmError};
use crate::model::{Diagnostic, DiagnosticReport, ErrorCategory, RunConfig, Severity};
use crate::retrieval::{ExemplarBlock, RetrievalError, ScoredDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ToolName {
    SyntaxCheck,
    RetrieveExamples,
    CodeRewrite,
}

impl ToolName {
    pub const ALL: [ToolName; 3] = [ToolName::SyntaxCheck, ToolName::RetrieveExamples, ToolName::CodeRewrite];

    pub fn as_str(self) -> &'static str {
        match self {
            ToolName::SyntaxCheck => "SyntaxCheck",
            ToolName::RetrieveExamples => "RetrieveExamples",
            ToolName::CodeRewrite => "CodeRewrite",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ToolName::SyntaxCheck => "Analyse a VHDL unit with GHDL (--std=08) and return its diagnostics.",
            ToolName::RetrieveExamples => "Return the most similar complete VHDL units from the exemplar corpus, cut to the token budget.",
            ToolName::CodeRewrite => "Rewrite a VHDL unit from an instruction list in a fresh context and return the complete unit.",
        }
    }
}

impl fmt::Display for ToolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ToolName {
    type Err = ToolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ToolName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ToolError::UnknownTool(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: ToolName,
    pub description: String,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolRegistry {
    specs: Vec<ToolSpec>,
}

impl Default for ToolRegistry {
    fn default() -> Self {
        Self {
            specs: ToolName::ALL
                .into_iter()
                .map(|name| ToolSpec {
                    name,
                    description: name.description().to_string(),
                    enabled: true,
                })
                .collect(),
        }
    }
}

impl ToolRegistry {
    pub fn specs(&self) -> &[ToolSpec] {
        &self.specs
    }

    pub fn set_enabled(&mut self, name: ToolName, enabled: bool) {
        if let Some(s) = self.specs.iter_mut().find(|s| s.name == name) {
            s.enabled = enabled;
        }
    }

    /// Resolves a requested tool name against the menu.
    pub fn resolve(&self, name: &str) -> Result<ToolName, ToolError> {
        let tool: ToolName = name.parse()?;
        match self.specs.iter().find(|s| s.name == tool) {
            Some(s) if s.enabled => Ok(tool),
            _ => Err(ToolError::DisabledTool(name.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub id: String,
    pub tool: String,
    pub arguments: Value,
}

impl ToolCall {
    pub fn new(id: impl Into<String>, tool: ToolName, arguments: Value) -> Self {
        Self {
            id: id.into(),
            tool: tool.as_str().to_string(),
            arguments,
        }
    }

    pub fn arguments_digest(&self) -> String {
        digest(&self.arguments.to_string())
    }
}

/// Typed form of a tool result, for in-process callers.
#[derive(Debug, Clone, PartialEq)]
pub enum ToolOutput {
    Report(DiagnosticReport),
    Exemplars { hits: Vec<ScoredDoc>, block: ExemplarBlock },
    Code(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolResult {
    pub call_id: String,
    pub payload: String,
    pub token_count: usize,
    pub duration_ms: u64,
    #[serde(skip)]
    pub output: ToolOutput,
}

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("tool `{0}` is disabled")]
    DisabledTool(String),
    #[error("invalid arguments for {tool}: {message}")]
    InvalidArguments { tool: String, message: String },
    #[error("no retrieval index is configured")]
    NoRetriever,
    #[error(transparent)]
    Compiler(#[from] CompilerError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("audit log: {0}")]
    Audit(#[from] std::io::Error),
}

/// Where a call happens; fills the audit entry and scopes scratch files.
#[derive(Debug, Clone)]
pub struct ToolContext<'a> {
    pub cfg: &'a RunConfig,
    pub case_id: String,
    pub run_index: u32,
    pub candidate_index: u32,
    pub iteration: Option<u32>,
    pub seed: u64,
    pub workdir: PathBuf,
    /// Receives model exchanges made inside a tool (the generator turn).
    pub sink: Option<&'a Mutex<Vec<Exchange>>>,
}

/// Check that never fails on ordinary compiler trouble: unparseable output
/// and timeouts become a failing report.
pub fn check_or_synthetic(services: &Services, code: &str, ctx: &ToolContext) -> Result<CheckOutput, CompilerError> {
    match report_or_synthetic(services.checker.check(code, &ctx.workdir)) {
        Err(CompilerError::Timeout(d)) => {
            let message = format!("syntax check timed out after {}s", d.as_secs());
            Ok(CheckOutput {
                report: DiagnosticReport::new(vec![Diagnostic {
                    file: CANDIDATE_FILE.into(),
                    line: 1,
                    column: 1,
                    severity: Severity::Error,
                    message,
                    category: ErrorCategory::Other,
                }]),
                raw: crate::compiler::RawCompilerOutput {
                    exit_code: -1,
                    stdout: String::new(),
                    stderr: String::new(),
                    duration: d,
                },
                unparsed: Vec::new(),
            })
        }
        other => other,
    }
}

fn str_arg<'v>(call: &'v ToolCall, key: &str) -> Result<&'v str, ToolError> {
    call.arguments
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| ToolError::InvalidArguments {
            tool: call.tool.clone(),
            message: format!("missing string `{key}`"),
        })
}

fn run_tool(tool: ToolName, call: &ToolCall, services: &Services, ctx: &ToolContext) -> Result<(ToolOutput, String, Option<String>), ToolError> {
    match tool {
        ToolName::SyntaxCheck => {
            let code = str_arg(call, "code")?;
            let out = check_or_synthetic(services, code, ctx)?;
            let payload = serde_json::to_string(&out.report).expect("report serializes");
            Ok((ToolOutput::Report(out.report), payload, None))
        }
        ToolName::RetrieveExamples => {
            let retriever = services.retriever.as_ref().ok_or(ToolError::NoRetriever)?;
            let query = str_arg(call, "query")?;
            let k = call
                .arguments
                .get("k")
                .and_then(Value::as_u64)
                .map_or(ctx.cfg.retrieval_k as usize, |k| k as usize);
            let budget = call
                .arguments
                .get("budget")
                .and_then(Value::as_u64)
                .map_or(ctx.cfg.exemplar_token_budget, |b| b as usize);
            let hits = retriever.search(query, k)?;
            let block = retriever.format(&hits, budget);
            let payload = block.rendered_text.clone();
            Ok((ToolOutput::Exemplars { hits, block }, payload, None))
        }
        ToolName::CodeRewrite => {
            let code = str_arg(call, "code")?;
            let plan: InstructionList = serde_json::from_value(call.arguments.get("instructions").cloned().unwrap_or(Value::Null))
                .map_err(|e| ToolError::InvalidArguments {
                    tool: call.tool.clone(),
                    message: format!("instructions: {e}"),
                })?;
            let messages = generator_messages(code, &plan);
            let completion = services.chat.complete(&messages, &ctx.cfg.decoding, ctx.seed)?;
            if let Some(sink) = ctx.sink {
                sink.lock().unwrap_or_else(|e| e.into_inner()).push(Exchange {
                    stage: "generator".into(),
                    iteration: ctx.iteration,
                    prompt_tokens: messages.iter().map(|m| services.counter.count(&m.content)).sum(),
                    messages: messages.clone(),
                    completion: completion.text.clone(),
                });
            }
            let new_code = extract_tagged_code(&completion.text, CODE_TAG)?;
            let diff = (new_code != code).then(|| unified_diff(code, &new_code, "before.vhd", "after.vhd"));
            Ok((ToolOutput::Code(new_code.clone()), new_code, diff))
        }
    }
}

/// Routes a call to its tool and writes exactly one audit entry for it,
/// whether it succeeded or failed.
pub fn dispatch_tool(call: &ToolCall, services: &Services, ctx: &ToolContext) -> Result<ToolResult, ToolError> {
    let started = Instant::now();
    let outcome = services
        .registry
        .resolve(&call.tool)
        .and_then(|tool| run_tool(tool, call, services, ctx));
    let mut record = AuditRecord {
        case_id: ctx.case_id.clone(),
        run_index: ctx.run_index,
        candidate_index: ctx.candidate_index,
        iteration: ctx.iteration,
        tool: call.tool.clone(),
        stage: None,
        call_id: call.id.clone(),
        input_digest: call.arguments_digest(),
        output_digest: String::new(),
        diff: None,
        error: None,
    };
    match outcome {
        Ok((output, payload, diff)) => {
            record.output_digest = digest(&payload);
            record.diff = diff;
            services.audit.append(record)?;
            Ok(ToolResult {
                call_id: call.id.clone(),
                token_count: services.counter.count(&payload),
                payload,
                duration_ms: started.elapsed().as_millis() as u64,
                output,
            })
        }
        Err(e) => {
            record.error = Some(e.to_string());
            services.audit.append(record)?;
            Err(e)
        }
    }
}

/// Arguments for the three tools, as the loop builds them.
pub fn syntax_check_args(code: &str) -> Value {
    json!({ "code": code })
}

pub fn retrieve_args(query: &str) -> Value {
    json!({ "query": query })
}

pub fn rewrite_args(code: &str, plan: &InstructionList) -> Value {
    json!({ "code": code, "instructions": plan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::MockChecker;
    use crate::llm::{FixtureRecord, ScriptedBackend};
    use std::sync::Arc;

    fn services() -> Services {
        Services::new(
            Arc::new(MockChecker::new()),
            Arc::new(ScriptedBackend::from_records(vec![FixtureRecord::contains(
                ["Edit directives"],
                "<code>\nentity e is\nend entity;\n</code>",
            )])),
        )
    }

    fn ctx<'a>(cfg: &'a RunConfig, dir: &std::path::Path) -> ToolContext<'a> {
        ToolContext {
            cfg,
            case_id: "c".into(),
            run_index: 0,
            candidate_index: 0,
            iteration: Some(0),
            seed: 1,
            workdir: dir.to_path_buf(),
            sink: None,
        }
    }

    #[test]
    fn syntax_check_payload_is_the_report() {
        let tmp = tempfile::tempdir().unwrap();
        let s = services();
        let cfg = RunConfig::default();
        let code = "entity e is\n  port (a : in std_logic);\nend entity;\n";
        let r = dispatch_tool(&ToolCall::new("t1", ToolName::SyntaxCheck, syntax_check_args(code)), &s, &ctx(&cfg, tmp.path())).unwrap();
        let report: DiagnosticReport = serde_json::from_str(&r.payload).unwrap();
        assert!(!report.pass);
        assert_eq!(ToolOutput::Report(report), r.output);
        let entries = s.audit.entries();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].call_id, "t1");
    }

    #[test]
    fn manual_lookup_is_unknown() {
        let tmp = tempfile::tempdir().unwrap();
        let s = services();
        let cfg = RunConfig::default();
        let call = ToolCall {
            id: "t2".into(),
            tool: "ManualLookup".into(),
            arguments: json!({}),
        };
        let err = dispatch_tool(&call, &s, &ctx(&cfg, tmp.path())).unwrap_err();
        assert!(matches!(err, ToolError::UnknownTool(ref n) if n == "ManualLookup"));
        assert_eq!(s.audit.entries()[0].error.as_deref(), Some("unknown tool `ManualLookup`"));
    }

    #[test]
    fn disabled_and_missing_retriever() {
        let tmp = tempfile::tempdir().unwrap();
        let mut s = services();
        let cfg = RunConfig::default();
        let call = ToolCall::new("t3", ToolName::RetrieveExamples, retrieve_args("q"));
        assert!(matches!(dispatch_tool(&call, &s, &ctx(&cfg, tmp.path())), Err(ToolError::NoRetriever)));
        s.registry.set_enabled(ToolName::RetrieveExamples, false);
        assert!(matches!(dispatch_tool(&call, &s, &ctx(&cfg, tmp.path())), Err(ToolError::DisabledTool(_))));
    }

    #[test]
    fn rewrite_records_a_diff() {
        let tmp = tempfile::tempdir().unwrap();
        let s = services();
        let cfg = RunConfig::default();
        let plan = InstructionList {
            instructions: vec!["close the entity".into()],
            rationale: String::new(),
        };
        let old = "entity e is\nend;\n";
        let r = dispatch_tool(&ToolCall::new("t4", ToolName::CodeRewrite, rewrite_args(old, &plan)), &s, &ctx(&cfg, tmp.path())).unwrap();
        assert_eq!(r.payload, "entity e is\nend entity;");
        let e = &s.audit.entries()[0];
        assert_eq!(crate::diff::apply_patch(old, e.diff.as_deref().unwrap()).unwrap(), r.payload);
    }
}
