//! `hdl-mend` command surface.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success (for `repair`: the file passes) |
//! | 1 | `repair` ran but no syntax pass within the iteration limit |
//! | 2 | invalid input: config, dataset, corpus, index or outcome store |
//! | 3 | embedding backend failed while building an index |
//! | 4 | a configured backend is unreachable at startup |
//! | 5 | internal error during a run |

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::llm::{BackendKind, BackendProfile, LlmError};
use crate::metrics::{compute_report, render_report, CandidateOutcome, MacroReport, ReportFormat};
use crate::model::{config_from_str, load_dataset, parse_config, Candidate, PolicyKind, Provenance, RunConfig, Verdict};
use crate::orchestrator::server::serve;
use crate::orchestrator::{load_retriever, repair_trial, transcript_path, AuditLog, RepairError, Services};
use crate::retrieval::{build_embedder, build_index, RetrievalError};
use crate::verifier::build_verifier;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_PASS: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_EMBEDDING: i32 = 3;
pub const EXIT_UNREACHABLE: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

pub const CONFIG_FILE: &str = "config.json";
pub const OUTCOMES_FILE: &str = "outcomes.jsonl";
pub const AUDIT_FILE: &str = "audit.jsonl";
pub const TRANSCRIPT_DIR: &str = "transcripts";
pub const REPORT_TEXT: &str = "report.txt";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID, message)
    }
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse()
}

#[derive(Debug, Parser)]
#[command(name = "hdl-mend", version, about = "Compiler-in-the-loop repair of broken VHDL candidates")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a corpus of VHDL files into a retrieval index.
    BuildIndex {
        corpus_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Take the embedding backend from this run config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Embedder override: `hashing`, `hashing:<dims>` or `scripted:<fixture>`.
        #[arg(long)]
        embedder: Option<String>,
    },
    /// Repair every candidate of a dataset, R runs over K candidates per case.
    Run {
        dataset_dir: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_policy)]
        policy: Option<PolicyKind>,
        /// Parent directory for the run directory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repair a single file; writes `<stem>.repaired.vhd` next to it.
    Repair {
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_policy)]
        policy: Option<PolicyKind>,
        /// Write the transcript and audit log here.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
    /// Recompute and render metrics for one or more run directories.
    Report {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the tool menu as line-delimited JSON-RPC on stdin/stdout.
    ServeTools {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        audit: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::BuildIndex {
            corpus_dir,
            out,
            config,
            embedder,
        } => cmd_build_index(&corpus_dir, &out, config.as_deref(), embedder.as_deref()),
        Command::Run {
            dataset_dir,
            config,
            policy,
            out,
            workers,
            seed,
        } => {
            let mut cfg = load_config(Some(&config))?;
            if let Some(p) = policy {
                cfg.policy = p;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate().map_err(|e| CliError::invalid(e.to_string()))?;
            cmd_run(&dataset_dir, &cfg, &out).map(|a| {
                println!("run directory: {}", a.run_dir.display());
                EXIT_OK
            })
        }
        Command::Repair {
            file,
            config,
            policy,
            log_dir,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(p) = policy {
                cfg.policy = p;
            }
            cmd_repair_one(&file, &cfg, log_dir.as_deref())
        }
        Command::Report { run_dirs, format, out } => {
            let format = match format {
                FormatArg::Table => ReportFormat::Table,
                FormatArg::Json => ReportFormat::Json,
            };
            let text = cmd_report(&run_dirs, format)?;
            match out {
                Some(p) => fs::write(&p, &text).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
        Command::ServeTools { config, audit } => {
            let cfg = load_config(config.as_deref())?;
            cmd_serve_tools(&cfg, audit.as_deref())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => parse_config(p).map_err(|e| CliError::invalid(format!("{}: {e}", p.display()))),
        None => Ok(RunConfig::default()),
    }
}

fn embedder_profile(spec: &str) -> Result<BackendProfile, CliError> {
    match spec.split_once(':') {
        None if spec == "hashing" => Ok(BackendProfile::hashing(crate::retrieval::HashingEmbedder::DEFAULT_DIMS)),
        Some(("hashing", dims)) => dims
            .parse()
            .map(BackendProfile::hashing)
            .map_err(|_| CliError::invalid(format!("bad hashing dimension `{dims}`"))),
        Some(("scripted", path)) => Ok(BackendProfile::scripted(path)),
        _ => Err(CliError::invalid(format!(
            "unknown embedder `{spec}` (expected hashing, hashing:<dims> or scripted:<fixture>)"
        ))),
    }
}

pub fn cmd_build_index(corpus_dir: &Path, out: &Path, config: Option<&Path>, embedder: Option<&str>) -> Result<i32, CliError> {
    let profile = match embedder {
        Some(spec) => embedder_profile(spec)?,
        None => load_config(config)?.embedding_backend,
    };
    if !corpus_dir.is_dir() {
        return Err(CliError::invalid(format!("corpus directory not found: {}", corpus_dir.display())));
    }
    let client = build_embedder(&profile).map_err(|e| match e {
        LlmError::Fixture { .. } | LlmError::Profile(_) => CliError::invalid(e.to_string()),
        other => CliError::new(EXIT_EMBEDDING, other.to_string()),
    })?;
    let (index, report) = build_index(corpus_dir, &client).map_err(|e| match e {
        RetrievalError::EmptyCorpus(_) | RetrievalError::Io { .. } => CliError::invalid(e.to_string()),
        other => CliError::new(EXIT_EMBEDDING, format!("embedding failed: {other}")),
    })?;
    for (path, why) in &report.skipped {
        log::warn!("skipped {}: {why}", path.display());
    }
    index.save(out).map_err(|e| CliError::new(EXIT_INTERNAL, e.to_string()))?;
    println!(
        "indexed {} documents ({} duplicates dropped, {} skipped), dimension {}",
        index.len(),
        report.duplicates.len(),
        report.skipped.len(),
        index.dim
    );
    Ok(EXIT_OK)
}

/// Fails fast when an HTTP backend's host does not accept connections.
fn probe(profile: &BackendProfile) -> Result<(), CliError> {
    if profile.kind != BackendKind::Http {
        return Ok(());
    }
    let url = profile.endpoint_url.as_deref().unwrap_or_default();
    let unreachable = |why: String| CliError::new(EXIT_UNREACHABLE, format!("backend {url} unreachable: {why}"));
    let uri: ureq::http::Uri = url.parse().map_err(|e| CliError::invalid(format!("bad endpoint_url `{url}`: {e}")))?;
    let host = uri.host().ok_or_else(|| CliError::invalid(format!("endpoint_url `{url}` has no host")))?;
    let port = uri
        .port_u16()
        .unwrap_or(if uri.scheme_str() == Some("https") { 443 } else { 80 });
    let addr = (host, port)
        .to_socket_addrs()
        .map_err(|e| unreachable(e.to_string()))?
        .next()
        .ok_or_else(|| unreachable("no address".into()))?;
    TcpStream::connect_timeout(&addr, Duration::from_secs(5)).map_err(|e| unreachable(e.to_string()))?;
    Ok(())
}

fn services_error(e: RepairError) -> CliError {
    match e {
        RepairError::Backend(LlmError::Network { .. } | LlmError::Timeout(_)) => CliError::new(EXIT_UNREACHABLE, e.to_string()),
        other => CliError::invalid(other.to_string()),
    }
}

/// Where a batch run left its files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifacts {
    pub run_dir: PathBuf,
    pub config_path: PathBuf,
    pub outcomes_path: PathBuf,
    pub transcript_dir: PathBuf,
    pub audit_path: PathBuf,
    pub report_path: PathBuf,
}

impl RunArtifacts {
    fn new(run_dir: PathBuf) -> Self {
        Self {
            config_path: run_dir.join(CONFIG_FILE),
            outcomes_path: run_dir.join(OUTCOMES_FILE),
            transcript_dir: run_dir.join(TRANSCRIPT_DIR),
            audit_path: run_dir.join(AUDIT_FILE),
            report_path: run_dir.join(REPORT_TEXT),
            run_dir,
        }
    }
}

fn create_run_dir(parent: &Path, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let base = format!("{}_{}_{stamp}", cfg.policy.as_str(), cfg.chat_backend.short_model_name());
    fs::create_dir_all(parent).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", parent.display())))?;
    for n in 0.. {
        let name = if n == 0 { base.clone() } else { format!("{base}-{n}") };
        let dir = parent.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::new(EXIT_INTERNAL, format!("{}: {e}", dir.display()))),
        }
    }
    unreachable!()
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", path.display())))
}

pub fn cmd_run(dataset_dir: &Path, cfg: &RunConfig, out_parent: &Path) -> Result<RunArtifacts, CliError> {
    let (manifest, cases) = load_dataset(dataset_dir, cfg).map_err(|e| CliError::invalid(e.to_string()))?;
    if cfg.policy.uses_retrieval() && cfg.index_path.is_none() {
        return Err(CliError::invalid(format!(
            "policy {} needs a retrieval index: set `index_path` in the config",
            cfg.policy.as_str()
        )));
    }
    probe(&cfg.chat_backend)?;
    if cfg.policy.uses_retrieval() {
        probe(&cfg.embedding_backend)?;
    }
    let services = Services::from_config(cfg).map_err(services_error)?;

    let artifacts = RunArtifacts::new(create_run_dir(out_parent, cfg)?);
    write_file(&artifacts.config_path, &cfg.to_json_pretty())?;
    let audit = AuditLog::open(&artifacts.audit_path)
        .map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", artifacts.audit_path.display())))?;
    let services = services
        .with_audit(Arc::new(audit))
        .with_transcript_dir(&artifacts.transcript_dir)
        .with_scratch_root(artifacts.run_dir.join("scratch"));
    let verifier = build_verifier(&cfg.verifier, Some(&manifest.root));

    let mut trials: Vec<(u32, &Candidate)> = Vec::new();
    for case in &cases {
        for run in 0..cfg.runs_per_function {
            for cand in &case.candidates {
                trials.push((run, cand));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<CandidateOutcome>> = Mutex::new(Vec::with_capacity(trials.len()));
    let failure: Mutex<Option<CliError>> = Mutex::new(None);
    let workers = cfg.workers.clamp(1, trials.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(run, cand)) = trials.get(i) else {
                    break;
                };
                match repair_trial(cand, run, cfg, &services) {
                    Ok((outcome, _)) => {
                        let verdict = if outcome.syntax_pass {
                            let dir = services
                                .scratch_root
                                .join(format!("verify_{}_r{run}_c{}", cand.case_id, cand.index));
                            verifier.verify(&cand.case_id, &outcome.final_vhdl, &dir)
                        } else {
                            Verdict::Unavailable
                        };
                        results.lock().unwrap_or_else(|e| e.into_inner()).push(CandidateOutcome {
                            case_id: cand.case_id.clone(),
                            run_index: run,
                            candidate_index: cand.index as u32,
                            syntax_pass: outcome.syntax_pass,
                            submitted_to_verifier: outcome.syntax_pass,
                            verdict,
                            iterations_used: outcome.iterations_used,
                            tool_call_count: outcome.tool_call_count,
                        });
                    }
                    Err(e) => {
                        abort.store(true, Ordering::SeqCst);
                        let t = transcript_path(&artifacts.transcript_dir, &cand.case_id, run, cand.index as u32);
                        let mut f = failure.lock().unwrap_or_else(|e| e.into_inner());
                        if f.is_none() {
                            *f = Some(CliError::new(
                                EXIT_INTERNAL,
                                format!("{} run {run} candidate {}: {e} (transcript: {})", cand.case_id, cand.index, t.display()),
                            ));
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap_or_else(|e| e.into_inner()) {
        return Err(e);
    }

    let mut outcomes = results.into_inner().unwrap_or_else(|e| e.into_inner());
    outcomes.sort_by(|a, b| {
        (a.case_id.as_str(), a.run_index, a.candidate_index).cmp(&(b.case_id.as_str(), b.run_index, b.candidate_index))
    });
    let mut store = String::new();
    for o in &outcomes {
        store.push_str(&serde_json::to_string(o).expect("outcome serializes"));
        store.push('\n');
    }
    write_file(&artifacts.outcomes_path, &store)?;

    let report = compute_report(
        cfg.policy,
        &cfg.chat_backend.short_model_name(),
        &outcomes,
        cfg.runs_per_function,
        cfg.candidates_per_function,
    )
    .map_err(|e| CliError::new(EXIT_INTERNAL, e.to_string()))?;
    let table = render_report(std::slice::from_ref(&report), ReportFormat::Table);
    write_file(&artifacts.report_path, &table)?;
    write_file(
        &artifacts.run_dir.join(REPORT_JSON),
        &render_report(std::slice::from_ref(&report), ReportFormat::Json),
    )?;
    print!("{table}");
    let _ = fs::remove_dir_all(artifacts.run_dir.join("scratch"));
    Ok(artifacts)
}

/// `foo.vhd` → `foo.repaired.vhd` in the same directory.
pub fn repaired_path(file: &Path) -> PathBuf {
    let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    file.with_file_name(format!("{stem}.repaired.vhd"))
}

pub fn cmd_repair_one(file: &Path, cfg: &RunConfig, log_dir: Option<&Path>) -> Result<i32, CliError> {
    let text = fs::read_to_string(file).map_err(|e| CliError::invalid(format!("{}: {e}", file.display())))?;
    if cfg.policy.uses_retrieval() && cfg.index_path.is_none() {
        return Err(CliError::invalid(format!(
            "policy {} needs a retrieval index: set `index_path` in the config",
            cfg.policy.as_str()
        )));
    }
    probe(&cfg.chat_backend)?;
    let mut services = Services::from_config(cfg).map_err(services_error)?;
    let scratch = tempfile_dir()?;
    services = services.with_scratch_root(&scratch);
    if let Some(dir) = log_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", dir.display())))?;
        let audit_path = dir.join(AUDIT_FILE);
        let audit = AuditLog::open(&audit_path).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", audit_path.display())))?;
        services = services.with_audit(Arc::new(audit)).with_transcript_dir(dir.join(TRANSCRIPT_DIR));
    }
    let candidate = Candidate {
        case_id: file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "input".into()),
        index: 0,
        vhdl_text: text,
        provenance: Provenance::Dataset,
    };
    let result = repair_trial(&candidate, 0, cfg, &services);
    let _ = fs::remove_dir_all(&scratch);
    let (outcome, _) = result.map_err(|e| CliError::new(EXIT_INTERNAL, e.to_string()))?;
    let out = repaired_path(file);
    write_file(&out, &outcome.final_vhdl)?;
    println!(
        "{}: {} after {} iterations, {} tool calls",
        out.display(),
        if outcome.syntax_pass { "syntax pass" } else { "no syntax pass" },
        outcome.iterations_used,
        outcome.tool_call_count
    );
    Ok(if outcome.syntax_pass { EXIT_OK } else { EXIT_NO_PASS })
}

fn tempfile_dir() -> Result<PathBuf, CliError> {
    let dir = std::env::temp_dir().join(format!(
        "hdl-mend-repair-{}-{}",
        std::process::id(),
        chrono::Utc::now().timestamp_nanos_opt().unwrap_or_default()
    ));
    fs::create_dir_all(&dir).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// Reads an outcome store, naming the byte offset of the first bad line.
pub fn read_outcomes(path: &Path) -> Result<Vec<CandidateOutcome>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let mut offset = 0usize;
    let mut out = Vec::new();
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| CliError::invalid(format!("{} at byte {offset}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        if !line.trim().is_empty() {
            let o = serde_json::from_str(line.trim_end_matches(['\n', '\r'])).map_err(|e| {
                let col = if e.line() == 1 { e.column().saturating_sub(1) } else { 0 };
                CliError::invalid(format!("{}: corrupt outcome store at byte {}: {e}", path.display(), offset + col))
            })?;
            out.push(o);
        }
        offset += n;
    }
    Ok(out)
}

fn load_run_report(dir: &Path) -> Result<MacroReport, CliError> {
    let cfg_path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&cfg_path).map_err(|e| CliError::invalid(format!("{}: {e}", cfg_path.display())))?;
    let cfg = config_from_str(&text, None).map_err(|e| CliError::invalid(format!("{}: {e}", cfg_path.display())))?;
    let outcomes = read_outcomes(&dir.join(OUTCOMES_FILE))?;
    compute_report(
        cfg.policy,
        &cfg.chat_backend.short_model_name(),
        &outcomes,
        cfg.runs_per_function,
        cfg.candidates_per_function,
    )
    .map_err(|e| CliError::invalid(format!("{}: {e}", dir.join(OUTCOMES_FILE).display())))
}

/// One column per run directory, in the order given.
pub fn cmd_report(run_dirs: &[PathBuf], format: ReportFormat) -> Result<String, CliError> {
    let reports = run_dirs.iter().map(|d| load_run_report(d)).collect::<Result<Vec<_>, _>>()?;
    Ok(render_report(&reports, format))
}

pub fn cmd_serve_tools(cfg: &RunConfig, audit: Option<&Path>) -> Result<i32, CliError> {
    let mut tool_cfg = cfg.clone();
    // the server loads whatever the config offers; no policy is being run
    tool_cfg.policy = PolicyKind::Expert;
    let mut services = Services::from_config(&tool_cfg).map_err(services_error)?;
    if cfg.index_path.is_some() {
        services.retriever = Some(Arc::new(load_retriever(cfg).map_err(services_error)?));
    }
    if let Some(p) = audit {
        let log = AuditLog::open(p).map_err(|e| CliError::new(EXIT_INTERNAL, format!("{}: {e}", p.display())))?;
        services = services.with_audit(Arc::new(log));
    }
    let scratch = tempfile_dir()?;
    services = services.with_scratch_root(&scratch);
    let stdin = io::stdin();
    let stdout = io::stdout();
    let result = serve(stdin.lock(), stdout.lock(), &services, cfg);
    let _ = fs::remove_dir_all(&scratch);
    result.map_err(|e| CliError::new(EXIT_INTERNAL, e.to_string()))?;
    io::stdout().flush().ok();
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repaired_name() {
        assert_eq!(repaired_path(Path::new("/a/b/foo.vhd")), PathBuf::from("/a/b/foo.repaired.vhd"));
    }

    #[test]
    fn corrupt_store_names_offset() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join(OUTCOMES_FILE);
        let good = r#"{"case_id":"a","run_index":0,"candidate_index":0,"syntax_pass":false,"submitted_to_verifier":false,"verdict":"unavailable"}"#;
        fs::write(&p, format!("{good}\n{{\"case_id\": x}}\n")).unwrap();
        let err = read_outcomes(&p).unwrap_err();
        assert_eq!(err.code, EXIT_INVALID);
        let expected = good.len() + 1 + "{\"case_id\": ".len();
        assert!(err.message.contains(&format!("at byte {expected}")), "{}", err.message);
    }

    #[test]
    fn embedder_specs() {
        assert_eq!(embedder_profile("hashing:32").unwrap().dimensions, Some(32));
        assert_eq!(embedder_profile("scripted:x.json").unwrap().kind, BackendKind::Scripted);
        assert_eq!(embedder_profile("word2vec").unwrap_err().code, EXIT_INVALID);
    }

    #[test]
    fn bad_args_exit_invalid() {
        assert_eq!(main_with_args(["hdl-mend", "run"]), EXIT_INVALID);
        assert_eq!(main_with_args(["hdl-mend", "repair", "/nonexistent/x.vhd"]), EXIT_INVALID);
    }
}
