//! Compiler-in-the-loop repair of syntactically broken VHDL candidates.
//!
//! The crate is organised around the repair loop:
//!
//! * [`model`] holds shared domain types, run configuration and dataset loading.
//! * [`compiler`] runs the GHDL syntax check (or an offline mock) and turns its
//!   output into categorised diagnostics.
//! * [`llm`] is the chat-completion layer: HTTP and scripted backends, tagged
//!   code extraction and token counting.
//! * [`retrieval`] builds and queries the whole-function exemplar index.
//! * [`orchestrator`] implements the four repair policies and the audit log.
//! * [`metrics`] computes pass/reach/success rates and renders report tables.
//! * [`cli`] is the `hdl-mend` command surface.

pub mod cli;
pub mod compiler;
pub mod diff;
pub mod llm;
pub mod metrics;
pub mod model;
pub mod orchestrator;
pub mod retrieval;
pub mod verifier;

pub use compiler::{categorize, parse_diagnostics, CompilerProfile, SyntaxChecker};
pub use llm::{count_tokens, extract_tagged_code, ChatBackend, ChatMessage, DecodingParams};
pub use model::{
    assess_progress, parse_config, validate_dataset, Candidate, DatasetManifest, Diagnostic,
    DiagnosticReport, ErrorCategory, FunctionCase, PolicyKind, ProgressSignal, RunConfig,
};
pub use orchestrator::{repair_candidate, should_retrieve, RepairOutcome, RepairState, Services};
pub use retrieval::{ExemplarBlock, ExemplarDoc, ScoredDoc, VectorIndex};
