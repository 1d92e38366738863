//! The repair policies as explicit state machines over [`RepairState`].
//!
//! * Expert: one fixed prompt per iteration, compiler feedback only.
//! * Mcp: gated retrieval, a planner turn, then a clean-context generator turn.
//! * NaiveRag: the expert loop with exemplars appended on every iteration.
//! * Hybrid: the Mcp flow with a single retrieval whose block persists.

pub mod audit;
pub mod prompts;
pub mod server;
pub mod tools;
pub mod transcript;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compiler::{CompilerError, GhdlChecker, KeywordTable, MockChecker, SyntaxChecker};
use crate::diff::unified_diff;
use crate::llm::{build_chat_backend, extract_tagged_code, ChatBackend, ChatMessage, LlmError, TokenCounter, WhitespaceCounter};
use crate::model::{
    assess_progress, Candidate, CompilerKind, DiagnosticReport, PolicyKind, ProgressSignal, RunConfig,
};
use crate::retrieval::{build_embedder, compose_query, ExemplarBlock, RetrievalError, Retriever, TierTable, VectorIndex};

pub use crate::model::RepairOutcome;
pub use audit::{read_audit, replay_diffs, AuditEntry, AuditLog, AuditRecord, GENERATION};
pub use prompts::{InstructionList, BUNDLED_EXPERT_PROMPT, INSTRUCTION_TOKEN_CAP};
pub use tools::{dispatch_tool, ToolCall, ToolContext, ToolError, ToolName, ToolOutput, ToolRegistry, ToolResult, ToolSpec};
pub use transcript::{Exchange, Transcript, TranscriptOutcome, TranscriptRecord};

use prompts::{expert_messages, fallback_summary, planner_messages, requested_tools, summary_messages, CODE_TAG};
use tools::{retrieve_args, rewrite_args, syntax_check_args};

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("policy {0} needs a retrieval index but index_path is not set")]
    MissingIndex(PolicyKind),
    #[error("retrieval index is empty")]
    EmptyIndex,
    #[error("chat backend: {0}")]
    Backend(#[source] LlmError),
    #[error("compiler: {0}")]
    Compiler(#[from] CompilerError),
    #[error("retrieval: {0}")]
    Retrieval(#[from] RetrievalError),
    #[error("tool: {0}")]
    Tool(#[source] ToolError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<ToolError> for RepairError {
    fn from(e: ToolError) -> Self {
        match e {
            ToolError::Llm(e) => RepairError::Backend(e),
            ToolError::Compiler(e) => RepairError::Compiler(e),
            ToolError::Retrieval(RetrievalError::Backend(e)) => RepairError::Backend(e),
            ToolError::Retrieval(e) => RepairError::Retrieval(e),
            other => RepairError::Tool(other),
        }
    }
}

/// Everything a repair loop talks to. Shared read-only across workers.
pub struct Services {
    pub checker: Arc<dyn SyntaxChecker>,
    pub chat: Arc<dyn ChatBackend>,
    pub retriever: Option<Arc<Retriever>>,
    pub audit: Arc<AuditLog>,
    pub counter: Arc<dyn TokenCounter>,
    pub registry: ToolRegistry,
    pub expert_prompt: String,
    /// Per-candidate working directories live below this path.
    pub scratch_root: PathBuf,
    /// Transcripts are written here when set.
    pub transcript_dir: Option<PathBuf>,
}

impl Services {
    pub fn new(checker: Arc<dyn SyntaxChecker>, chat: Arc<dyn ChatBackend>) -> Self {
        Self {
            checker,
            chat,
            retriever: None,
            audit: Arc::new(AuditLog::in_memory()),
            counter: Arc::new(WhitespaceCounter),
            registry: ToolRegistry::default(),
            expert_prompt: BUNDLED_EXPERT_PROMPT.to_string(),
            scratch_root: std::env::temp_dir().join(format!("hdl-mend-{}", std::process::id())),
            transcript_dir: None,
        }
    }

    pub fn with_retriever(mut self, retriever: Retriever) -> Self {
        self.retriever = Some(Arc::new(retriever));
        self
    }

    pub fn with_audit(mut self, audit: Arc<AuditLog>) -> Self {
        self.audit = audit;
        self
    }

    pub fn with_scratch_root(mut self, dir: impl Into<PathBuf>) -> Self {
        self.scratch_root = dir.into();
        self
    }

    pub fn with_transcript_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.transcript_dir = Some(dir.into());
        self
    }

    /// Builds compiler, chat backend and (for retrieval policies) the retriever.
    pub fn from_config(cfg: &RunConfig) -> Result<Self, RepairError> {
        let table = match &cfg.compiler.keyword_table {
            Some(p) => KeywordTable::load(p)?,
            None => KeywordTable::bundled().clone(),
        };
        let checker: Arc<dyn SyntaxChecker> = match cfg.compiler.kind {
            CompilerKind::Ghdl => Arc::new(GhdlChecker::new(cfg.compiler.ghdl.clone()).with_table(table)),
            CompilerKind::Mock => Arc::new(MockChecker::with_table(table)),
        };
        let chat: Arc<dyn ChatBackend> = Arc::from(build_chat_backend(&cfg.chat_backend).map_err(RepairError::Backend)?);
        let mut services = Services::new(checker, chat);
        if let Some(p) = &cfg.expert_prompt_path {
            services.expert_prompt = fs::read_to_string(p).map_err(|source| RepairError::Io {
                path: p.clone(),
                source,
            })?;
        }
        if cfg.policy.uses_retrieval() {
            services.retriever = Some(Arc::new(load_retriever(cfg)?));
        }
        Ok(services)
    }
}

/// Loads the configured index and pairs it with the configured embedder.
pub fn load_retriever(cfg: &RunConfig) -> Result<Retriever, RepairError> {
    let path = cfg.index_path.as_ref().ok_or(RepairError::MissingIndex(cfg.policy))?;
    let index = VectorIndex::load(path)?;
    if index.is_empty() {
        return Err(RepairError::EmptyIndex);
    }
    let embedder = build_embedder(&cfg.embedding_backend)
        .map_err(RepairError::Backend)?
        .with_dim(index.dim);
    if embedder.id() != index.embedder_id {
        log::warn!(
            "index was built with `{}` but queries use `{}`",
            index.embedder_id,
            embedder.id()
        );
    }
    let mut retriever = Retriever::new(index, embedder);
    if let Some(p) = &cfg.tier_table {
        retriever = retriever.with_tiers(TierTable::load(p)?);
    }
    Ok(retriever)
}

/// Bounded per-iteration context. Nothing else survives between attempts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairState {
    /// Index of the next iteration to run.
    pub iteration: u32,
    pub current_vhdl: String,
    pub last_report: Option<DiagnosticReport>,
    pub prev_summary: Option<String>,
    pub persistent_exemplars: Option<ExemplarBlock>,
    pub progress: ProgressSignal,
    pub retrieval_used_this_iteration: bool,
}

impl RepairState {
    pub fn initial(vhdl: &str, precheck: DiagnosticReport) -> Self {
        Self {
            iteration: 0,
            current_vhdl: vhdl.to_string(),
            last_report: Some(precheck),
            prev_summary: None,
            persistent_exemplars: None,
            progress: ProgressSignal::NoBaseline,
            retrieval_used_this_iteration: false,
        }
    }

    pub fn is_passing(&self) -> bool {
        self.last_report.as_ref().is_some_and(|r| r.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptSummary {
    pub text: String,
    pub fallback: bool,
}

/// Retrieval gate: stuck, or an error in one of the trigger categories.
pub fn should_retrieve(state: &RepairState) -> bool {
    state.progress == ProgressSignal::NoProgress
        || state.last_report.as_ref().is_some_and(DiagnosticReport::has_trigger_category)
}

/// Per-call seed derived from the run seed and the call's position.
pub fn call_seed(base: u64, case_id: &str, run: u32, candidate: u32, iteration: Option<u32>, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(case_id.as_bytes());
    h.update([0]);
    h.update(run.to_le_bytes());
    h.update(candidate.to_le_bytes());
    h.update(iteration.map_or(u64::MAX, u64::from).to_le_bytes());
    h.update(stage.as_bytes());
    let bytes = h.finalize();
    u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
}

struct Generation {
    text: String,
    code: Option<Result<String, LlmError>>,
}

/// One candidate trial in progress: identity, scratch directory, transcript.
pub struct Trial<'a> {
    pub cfg: &'a RunConfig,
    pub services: &'a Services,
    pub case_id: String,
    pub run_index: u32,
    pub candidate_index: u32,
    pub workdir: PathBuf,
    pub transcript: Transcript,
    pub tool_calls: u32,
}

impl<'a> Trial<'a> {
    pub fn new(candidate: &Candidate, run_index: u32, cfg: &'a RunConfig, services: &'a Services) -> Self {
        let transcript = Transcript::new(
            &candidate.case_id,
            run_index,
            candidate.index as u32,
            cfg.policy,
            services.chat.id(),
        );
        let workdir = services.scratch_root.join(transcript.file_name().trim_end_matches(".json"));
        Self {
            cfg,
            services,
            case_id: candidate.case_id.clone(),
            run_index,
            candidate_index: candidate.index as u32,
            workdir,
            transcript,
            tool_calls: 0,
        }
    }

    fn seed(&self, iteration: Option<u32>, stage: &str) -> u64 {
        call_seed(self.cfg.seed, &self.case_id, self.run_index, self.candidate_index, iteration, stage)
    }

    /// Dispatches a tool and mirrors call, inner model turns and result into the transcript.
    pub fn call_tool(&mut self, iteration: Option<u32>, tool: ToolName, arguments: serde_json::Value) -> Result<ToolResult, ToolError> {
        let call = ToolCall::new(
            format!("{}/r{}/c{}/t{}", self.case_id, self.run_index, self.candidate_index, self.tool_calls),
            tool,
            arguments,
        );
        self.tool_calls += 1;
        self.transcript.push(TranscriptRecord::ToolCall {
            iteration,
            call: call.clone(),
        });
        let sink = Mutex::new(Vec::new());
        let ctx = ToolContext {
            cfg: self.cfg,
            case_id: self.case_id.clone(),
            run_index: self.run_index,
            candidate_index: self.candidate_index,
            iteration,
            seed: self.seed(iteration, tool.as_str()),
            workdir: self.workdir.clone(),
            sink: Some(&sink),
        };
        let result = dispatch_tool(&call, self.services, &ctx);
        for e in sink.into_inner().unwrap_or_else(|e| e.into_inner()) {
            self.transcript.push(TranscriptRecord::Exchange(e));
        }
        match &result {
            Ok(r) => self.transcript.push(TranscriptRecord::ToolResult {
                iteration,
                call_id: r.call_id.clone(),
                payload: r.payload.clone(),
                token_count: r.token_count,
            }),
            Err(e) => self.transcript.push(TranscriptRecord::ToolFailure {
                iteration,
                call_id: call.id.clone(),
                error: e.to_string(),
            }),
        }
        result
    }

    fn check(&mut self, iteration: u32, code: &str) -> Result<DiagnosticReport, RepairError> {
        match self.call_tool(Some(iteration), ToolName::SyntaxCheck, syntax_check_args(code))?.output {
            ToolOutput::Report(r) => Ok(r),
            _ => unreachable!("SyntaxCheck returns a report"),
        }
    }

    fn retrieve(&mut self, iteration: u32, report: &DiagnosticReport, code: &str) -> Result<ExemplarBlock, RepairError> {
        let query = compose_query(report, code);
        match self.call_tool(Some(iteration), ToolName::RetrieveExamples, retrieve_args(&query))?.output {
            ToolOutput::Exemplars { hits, block } => {
                self.transcript.push(TranscriptRecord::Retrieval {
                    iteration,
                    hits,
                    included_doc_ids: block.included_doc_ids.clone(),
                });
                Ok(block)
            }
            _ => unreachable!("RetrieveExamples returns exemplars"),
        }
    }

    /// A model turn outside the tool menu. With `current_code`, the reply's
    /// code block is extracted and any change is diffed into the audit entry.
    fn generate(&mut self, iteration: u32, stage: &str, messages: Vec<ChatMessage>, current_code: Option<&str>) -> Result<Generation, LlmError> {
        let input_digest = audit::digest(&serde_json::to_string(&messages).expect("messages serialize"));
        let prompt_tokens = messages.iter().map(|m| self.services.counter.count(&m.content)).sum();
        let mut record = AuditRecord {
            case_id: self.case_id.clone(),
            run_index: self.run_index,
            candidate_index: self.candidate_index,
            iteration: Some(iteration),
            tool: GENERATION.into(),
            stage: Some(stage.into()),
            call_id: format!("{}/r{}/c{}/i{iteration}/{stage}", self.case_id, self.run_index, self.candidate_index),
            input_digest,
            ..AuditRecord::default()
        };
        let completion = match self.services.chat.complete(&messages, &self.cfg.decoding, self.seed(Some(iteration), stage)) {
            Ok(c) => c,
            Err(e) => {
                record.error = Some(e.to_string());
                let _ = self.services.audit.append(record);
                self.transcript.push(TranscriptRecord::Error {
                    iteration: Some(iteration),
                    message: format!("{stage}: {e}"),
                });
                return Err(e);
            }
        };
        self.transcript.push(TranscriptRecord::Exchange(Exchange {
            stage: stage.into(),
            iteration: Some(iteration),
            messages,
            completion: completion.text.clone(),
            prompt_tokens,
        }));
        record.output_digest = audit::digest(&completion.text);
        let code = current_code.map(|old| {
            let extracted = extract_tagged_code(&completion.text, CODE_TAG);
            if let Ok(new) = &extracted {
                if new != old {
                    record.diff = Some(unified_diff(old, new, "before.vhd", "after.vhd"));
                }
            }
            extracted
        });
        if let Some(Err(e)) = &code {
            record.error = Some(e.to_string());
        }
        self.services.audit.append(record).map_err(|e| LlmError::InvalidRequest(format!("audit log: {e}")))?;
        Ok(Generation {
            text: completion.text,
            code,
        })
    }

    fn note_error(&mut self, iteration: u32, message: String) {
        self.transcript.push(TranscriptRecord::Error {
            iteration: Some(iteration),
            message,
        });
    }

    fn finish(&mut self, state: &RepairState) -> RepairOutcome {
        let pass = state.is_passing();
        self.transcript.outcome = Some(TranscriptOutcome {
            syntax_pass: pass,
            iterations_used: state.iteration,
            tool_call_count: self.tool_calls,
        });
        RepairOutcome {
            final_vhdl: state.current_vhdl.clone(),
            syntax_pass: pass,
            iterations_used: state.iteration,
            tool_call_count: self.tool_calls,
            transcript_path: None,
        }
    }
}

fn failing_report(state: &RepairState) -> DiagnosticReport {
    state
        .last_report
        .clone()
        .expect("iterations start from a checked state")
}

/// Adopts the new code (if any) and records the post-generation check.
fn close_iteration(trial: &mut Trial, state: &RepairState, new_code: Option<String>) -> Result<RepairState, RepairError> {
    let before = failing_report(state);
    let it = state.iteration;
    let mut next = state.clone();
    let report = match new_code {
        Some(code) => {
            let r = trial.check(it, &code)?;
            next.current_vhdl = code;
            r
        }
        None => before.clone(),
    };
    next.progress = assess_progress(Some(&before), &report);
    trial.transcript.push(TranscriptRecord::Report {
        iteration: it,
        report: report.clone(),
        progress: next.progress,
    });
    next.last_report = Some(report);
    next.iteration += 1;
    Ok(next)
}

fn adopt(trial: &mut Trial, it: u32, generation: Generation) -> Result<Option<String>, RepairError> {
    match generation.code {
        Some(Ok(code)) => Ok(Some(code)),
        Some(Err(LlmError::NoCodeFound)) => {
            trial.note_error(it, "no code block in completion; iteration consumed".into());
            Ok(None)
        }
        Some(Err(e)) => Err(RepairError::Backend(e)),
        None => Ok(None),
    }
}

fn expert_like(state: &RepairState, trial: &mut Trial, with_exemplars: bool) -> Result<RepairState, RepairError> {
    let it = state.iteration;
    let report = failing_report(state);
    let mut state = state.clone();
    state.retrieval_used_this_iteration = false;
    let exemplars = if with_exemplars {
        state.retrieval_used_this_iteration = true;
        Some(trial.retrieve(it, &report, &state.current_vhdl)?)
    } else {
        None
    };
    let messages = expert_messages(&trial.services.expert_prompt, &state.current_vhdl, &report, exemplars.as_ref());
    let stage = if with_exemplars { "naive_rag" } else { "expert" };
    let current = state.current_vhdl.clone();
    let generation = trial.generate(it, stage, messages, Some(&current)).map_err(RepairError::Backend)?;
    let new_code = adopt(trial, it, generation)?;
    close_iteration(trial, &state, new_code)
}

/// Fixed loop: expert guidance, code and errors; no tools besides the compiler.
pub fn run_expert_iteration(state: &RepairState, trial: &mut Trial) -> Result<RepairState, RepairError> {
    expert_like(state, trial, false)
}

/// The expert loop with a freshly retrieved exemplar block on every iteration.
pub fn run_naive_rag_iteration(state: &RepairState, trial: &mut Trial) -> Result<RepairState, RepairError> {
    expert_like(state, trial, true)
}

fn agentic(state: &RepairState, trial: &mut Trial, hybrid: bool) -> Result<RepairState, RepairError> {
    let it = state.iteration;
    let report = failing_report(state);
    let mut state = state.clone();
    state.retrieval_used_this_iteration = false;

    let exemplars = if hybrid {
        if state.persistent_exemplars.is_none() {
            state.persistent_exemplars = Some(trial.retrieve(it, &report, &state.current_vhdl)?);
            state.retrieval_used_this_iteration = true;
        }
        state.persistent_exemplars.clone()
    } else {
        let fired = should_retrieve(&state);
        trial.transcript.push(TranscriptRecord::Gate {
            iteration: it,
            progress: state.progress,
            trigger_category: report.has_trigger_category(),
            fired,
        });
        if fired {
            state.retrieval_used_this_iteration = true;
            Some(trial.retrieve(it, &report, &state.current_vhdl)?)
        } else {
            None
        }
    };

    let messages = planner_messages(&state.current_vhdl, &report, state.prev_summary.as_deref(), exemplars.as_ref());
    let plan_text = trial.generate(it, "planner", messages, None).map_err(RepairError::Backend)?.text;
    let requested = requested_tools(&plan_text);
    let plan = InstructionList::parse(&plan_text).map(|mut p| {
        p.enforce_cap(trial.services.counter.as_ref(), INSTRUCTION_TOKEN_CAP);
        p
    });

    let new_code = match &plan {
        Some(plan) => {
            trial.transcript.push(TranscriptRecord::Plan {
                iteration: it,
                plan: plan.clone(),
                requested_tools: requested,
            });
            let call = trial.call_tool(Some(it), ToolName::CodeRewrite, rewrite_args(&state.current_vhdl, plan));
            match call {
                Ok(r) => match r.output {
                    ToolOutput::Code(code) => Some(code),
                    _ => unreachable!("CodeRewrite returns code"),
                },
                Err(ToolError::Llm(LlmError::NoCodeFound)) => {
                    trial.note_error(it, "generator returned no code block; iteration consumed".into());
                    None
                }
                Err(e) => return Err(e.into()),
            }
        }
        None => {
            trial.note_error(it, "planner returned no instructions; iteration consumed".into());
            None
        }
    };

    let action = plan.as_ref().map_or_else(|| "no usable plan".to_string(), InstructionList::render);
    let next = close_iteration(trial, &state, new_code)?;
    let summary = summarize_attempt(&state, &next, &action, trial);
    let mut next = next;
    next.prev_summary = Some(summary.text);
    Ok(next)
}

/// Gated retrieval, planner turn, clean-context rewrite, check, summary.
pub fn run_mcp_iteration(state: &RepairState, trial: &mut Trial) -> Result<RepairState, RepairError> {
    agentic(state, trial, false)
}

/// As [`run_mcp_iteration`] but retrieving once and reusing the block.
pub fn run_hybrid_iteration(state: &RepairState, trial: &mut Trial) -> Result<RepairState, RepairError> {
    agentic(state, trial, true)
}

/// Short note about the attempt that just ran, hard-capped at the summary
/// budget. Falls back to a fixed template if the model call fails.
pub fn summarize_attempt(before: &RepairState, after: &RepairState, action: &str, trial: &mut Trial) -> AttemptSummary {
    let it = before.iteration;
    let budget = trial.cfg.summary_token_budget;
    let after_report = failing_report(after);
    let errors_before = before.last_report.as_ref().map_or(0, DiagnosticReport::error_count);
    let messages = summary_messages(it, action, errors_before, &after_report, budget);
    let summary = match trial.generate(it, "summary", messages, None) {
        Ok(g) => {
            let text = trial.services.counter.truncate(g.text.trim(), budget).to_string();
            if text.is_empty() {
                None
            } else {
                Some(text)
            }
        }
        Err(_) => None,
    };
    let summary = match summary {
        Some(text) => AttemptSummary { text, fallback: false },
        None => AttemptSummary {
            text: trial
                .services
                .counter
                .truncate(&fallback_summary(it, &after_report), budget)
                .to_string(),
            fallback: true,
        },
    };
    trial.transcript.push(TranscriptRecord::Summary {
        iteration: it,
        text: summary.text.clone(),
        fallback: summary.fallback,
    });
    summary
}

fn check_services(cfg: &RunConfig, services: &Services) -> Result<(), RepairError> {
    if cfg.policy.uses_retrieval() {
        let r = services.retriever.as_ref().ok_or(RepairError::MissingIndex(cfg.policy))?;
        if r.index.is_empty() {
            return Err(RepairError::EmptyIndex);
        }
    }
    Ok(())
}

fn run_loop(trial: &mut Trial, candidate: &Candidate) -> Result<RepairState, RepairError> {
    let cfg = trial.cfg;
    let pre = trial.call_tool(None, ToolName::SyntaxCheck, syntax_check_args(&candidate.vhdl_text))?;
    let ToolOutput::Report(pre) = pre.output else {
        unreachable!("SyntaxCheck returns a report")
    };
    trial.transcript.push(TranscriptRecord::Precheck { report: pre.clone() });
    let mut state = RepairState::initial(&candidate.vhdl_text, pre);
    while !state.is_passing() && state.iteration < cfg.max_iterations {
        state = match cfg.policy {
            PolicyKind::Expert => run_expert_iteration(&state, trial)?,
            PolicyKind::Mcp => run_mcp_iteration(&state, trial)?,
            PolicyKind::NaiveRag => run_naive_rag_iteration(&state, trial)?,
            PolicyKind::Hybrid => run_hybrid_iteration(&state, trial)?,
        };
    }
    Ok(state)
}

fn save_transcript(trial: &Trial) -> Result<Option<PathBuf>, RepairError> {
    match &trial.services.transcript_dir {
        Some(dir) => trial
            .transcript
            .save(dir)
            .map(Some)
            .map_err(|source| RepairError::Io {
                path: dir.clone(),
                source,
            }),
        None => Ok(None),
    }
}

/// Repairs one candidate of one run under `cfg.policy`.
///
/// The scratch directory is removed when the candidate passes and kept for
/// inspection otherwise. The transcript is written even when the loop fails.
pub fn repair_trial(candidate: &Candidate, run_index: u32, cfg: &RunConfig, services: &Services) -> Result<(RepairOutcome, Transcript), RepairError> {
    check_services(cfg, services)?;
    let mut trial = Trial::new(candidate, run_index, cfg, services);
    match run_loop(&mut trial, candidate) {
        Ok(state) => {
            let mut outcome = trial.finish(&state);
            outcome.transcript_path = save_transcript(&trial)?;
            if outcome.syntax_pass {
                let _ = fs::remove_dir_all(&trial.workdir);
            }
            Ok((outcome, trial.transcript))
        }
        Err(e) => {
            trial.transcript.push(TranscriptRecord::Error {
                iteration: None,
                message: format!("aborted: {e}"),
            });
            let _ = save_transcript(&trial);
            Err(e)
        }
    }
}

/// Repairs a single candidate (run 0).
pub fn repair_candidate(candidate: &Candidate, cfg: &RunConfig, services: &Services) -> Result<RepairOutcome, RepairError> {
    repair_trial(candidate, 0, cfg, services).map(|(o, _)| o)
}

/// Transcript path a trial would be written to.
pub fn transcript_path(dir: &Path, case_id: &str, run_index: u32, candidate_index: u32) -> PathBuf {
    dir.join(
        Transcript::new(case_id, run_index, candidate_index, PolicyKind::Expert, String::new()).file_name(),
    )
}

#[cfg(test)]
mod tests;
