//! GHDL syntax checking and diagnostic classification.

mod categorize;
mod mock;
mod parse;

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::model::{Diagnostic, DiagnosticReport, ErrorCategory, Severity};

pub use categorize::{categorize, KeywordTable};
pub use mock::MockChecker;
pub use parse::{parse_diagnostic_text, parse_diagnostics, unparsed_lines};

/// Environment variable that overrides the compiler binary.
pub const GHDL_ENV: &str = "HDLMEND_GHDL";

/// File name used for the candidate inside its scratch directory.
pub const CANDIDATE_FILE: &str = "candidate.vhd";

#[derive(Debug, Error)]
pub enum CompilerError {
    #[error("compiler binary not found: {0}")]
    CompilerNotFound(String),
    #[error("syntax check timed out after {0:?}")]
    Timeout(Duration),
    #[error("compiler exited with status {} but produced no parseable diagnostics", .raw.exit_code)]
    UnparseableOutput { raw: RawCompilerOutput },
    #[error("keyword table: {0}")]
    KeywordTable(String),
    #[error("io error in {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompilerProfile {
    #[serde(default = "default_binary")]
    pub binary_path: PathBuf,
    #[serde(default = "default_std_flag")]
    pub std_flag: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub extra_flags: Vec<String>,
}

fn default_binary() -> PathBuf {
    PathBuf::from("ghdl")
}
fn default_std_flag() -> String {
    "--std=08".to_string()
}
fn default_timeout() -> u64 {
    30
}

impl Default for CompilerProfile {
    fn default() -> Self {
        Self {
            binary_path: default_binary(),
            std_flag: default_std_flag(),
            timeout_secs: default_timeout(),
            extra_flags: Vec::new(),
        }
    }
}

impl CompilerProfile {
    /// Binary to execute, honouring `HDLMEND_GHDL`.
    pub fn resolved_binary(&self) -> PathBuf {
        std::env::var_os(GHDL_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| self.binary_path.clone())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    /// Argument vector after the binary: `-s <std> <extra..> <file>`.
    pub fn args(&self, file: &str) -> Vec<String> {
        let mut args = vec!["-s".to_string(), self.std_flag.clone()];
        args.extend(self.extra_flags.iter().cloned());
        args.push(file.to_string());
        args
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCompilerOutput {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub duration: Duration,
}

/// A report together with the raw text it was parsed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutput {
    pub report: DiagnosticReport,
    pub raw: RawCompilerOutput,
    pub unparsed: Vec<String>,
}

/// Anything that can syntax-check a VHDL unit inside a private working directory.
pub trait SyntaxChecker: Send + Sync {
    fn check(&self, vhdl: &str, workdir: &Path) -> Result<CheckOutput, CompilerError>;

    /// Short identifier recorded in transcripts.
    fn id(&self) -> String;
}

fn empty_unit_output() -> CheckOutput {
    let message = "empty design file: no design unit to analyze";
    let raw = RawCompilerOutput {
        exit_code: 1,
        stdout: String::new(),
        stderr: format!("{CANDIDATE_FILE}:1:1:error: {message}\n"),
        duration: Duration::ZERO,
    };
    CheckOutput {
        report: DiagnosticReport::new(vec![Diagnostic {
            file: CANDIDATE_FILE.into(),
            line: 1,
            column: 1,
            severity: Severity::Error,
            message: message.into(),
            category: ErrorCategory::Other,
        }]),
        raw,
        unparsed: Vec::new(),
    }
}

/// Runs the real GHDL binary in analysis-only mode.
#[derive(Debug, Clone)]
pub struct GhdlChecker {
    pub profile: CompilerProfile,
    pub table: KeywordTable,
}

impl GhdlChecker {
    pub fn new(profile: CompilerProfile) -> Self {
        Self {
            profile,
            table: KeywordTable::bundled().clone(),
        }
    }

    pub fn with_table(mut self, table: KeywordTable) -> Self {
        self.table = table;
        self
    }

    /// True when the configured binary can be spawned.
    pub fn is_available(&self) -> bool {
        Command::new(self.profile.resolved_binary())
            .arg("--version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok()
    }

    fn run(&self, workdir: &Path) -> Result<RawCompilerOutput, CompilerError> {
        let binary = self.profile.resolved_binary();
        let started = Instant::now();
        let mut child = Command::new(&binary)
            .args(self.profile.args(CANDIDATE_FILE))
            .current_dir(workdir)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| match e.kind() {
                io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied => {
                    CompilerError::CompilerNotFound(binary.display().to_string())
                }
                _ => CompilerError::Io {
                    path: binary.clone(),
                    source: e,
                },
            })?;

        let stdout = child.stdout.take().map(drain);
        let stderr = child.stderr.take().map(drain);
        let status = match child.wait_timeout(self.profile.timeout()) {
            Ok(Some(status)) => status,
            Ok(None) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(CompilerError::Timeout(self.profile.timeout()));
            }
            Err(source) => {
                return Err(CompilerError::Io {
                    path: binary,
                    source,
                })
            }
        };
        let collect = |h: Option<thread::JoinHandle<String>>| {
            h.map(|h| h.join().unwrap_or_default()).unwrap_or_default()
        };
        Ok(RawCompilerOutput {
            exit_code: status.code().unwrap_or(-1),
            stdout: collect(stdout),
            stderr: collect(stderr),
            duration: started.elapsed(),
        })
    }
}

fn drain<R: Read + Send + 'static>(mut r: R) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

impl SyntaxChecker for GhdlChecker {
    fn check(&self, vhdl: &str, workdir: &Path) -> Result<CheckOutput, CompilerError> {
        if vhdl.trim().is_empty() {
            return Ok(empty_unit_output());
        }
        fs::create_dir_all(workdir).map_err(|source| CompilerError::Io {
            path: workdir.to_path_buf(),
            source,
        })?;
        let file = workdir.join(CANDIDATE_FILE);
        fs::write(&file, vhdl).map_err(|source| CompilerError::Io { path: file, source })?;

        let raw = self.run(workdir)?;
        let diagnostics = parse_diagnostic_text(&raw.stderr, &self.table);
        let report = DiagnosticReport::new(diagnostics);
        if raw.exit_code != 0 && report.pass {
            return Err(CompilerError::UnparseableOutput { raw });
        }
        let unparsed = unparsed_lines(&raw.stderr);
        Ok(CheckOutput {
            report,
            raw,
            unparsed,
        })
    }

    fn id(&self) -> String {
        format!(
            "ghdl:{} {}",
            self.profile.resolved_binary().display(),
            self.profile.std_flag
        )
    }
}

/// Writes `vhdl` into `workdir` and runs the GHDL syntax check on it.
pub fn check_syntax(
    vhdl: &str,
    profile: &CompilerProfile,
    workdir: &Path,
) -> Result<DiagnosticReport, CompilerError> {
    GhdlChecker::new(profile.clone())
        .check(vhdl, workdir)
        .map(|out| out.report)
}

/// Applies [`CompilerError`] handling shared by every caller: a check that could
/// not be interpreted becomes a failing report carrying the raw text.
pub fn report_or_synthetic(result: Result<CheckOutput, CompilerError>) -> Result<CheckOutput, CompilerError> {
    match result {
        Err(CompilerError::UnparseableOutput { raw }) => {
            let first = raw
                .stderr
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("no output")
                .to_string();
            let message = format!("compiler exited with status {}: {first}", raw.exit_code);
            Ok(CheckOutput {
                report: DiagnosticReport::new(vec![Diagnostic {
                    file: CANDIDATE_FILE.into(),
                    line: 1,
                    column: 1,
                    severity: Severity::Error,
                    category: ErrorCategory::Other,
                    message,
                }]),
                unparsed: raw.stderr.lines().map(str::to_string).collect(),
                raw,
            })
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    #[cfg(unix)]
    use std::os::unix::fs::PermissionsExt;

    #[cfg(unix)]
    fn fake_ghdl(dir: &Path, script: &str) -> PathBuf {
        let path = dir.join("fake-ghdl");
        fs::write(&path, format!("#!/bin/sh\n{script}\n")).unwrap();
        fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    #[test]
    fn profile_defaults_and_args() {
        let p = CompilerProfile::default();
        assert_eq!(p.std_flag, "--std=08");
        assert_eq!(p.timeout_secs, 30);
        assert_eq!(p.args("a.vhd"), vec!["-s", "--std=08", "a.vhd"]);
    }

    #[test]
    fn missing_binary_is_reported() {
        let tmp = tempfile::tempdir().unwrap();
        let profile = CompilerProfile {
            binary_path: PathBuf::from("/nonexistent/ghdl-binary"),
            ..CompilerProfile::default()
        };
        let err = GhdlChecker::new(profile)
            .run(tmp.path())
            .unwrap_err();
        assert!(matches!(err, CompilerError::CompilerNotFound(_)));
    }

    #[test]
    fn empty_input_fails_without_spawning() {
        let tmp = tempfile::tempdir().unwrap();
        let profile = CompilerProfile {
            binary_path: PathBuf::from("/nonexistent/ghdl-binary"),
            ..CompilerProfile::default()
        };
        let report = check_syntax("  \n", &profile, tmp.path()).unwrap();
        assert!(!report.pass);
        assert!(report.error_count() >= 1);
    }

    #[cfg(unix)]
    #[test]
    fn subprocess_contract_with_stub_compiler() {
        let tmp = tempfile::tempdir().unwrap();
        // echoes its arguments, then reports one error on stderr
        let bin = fake_ghdl(
            tmp.path(),
            r#"echo "$@" > args.txt
echo 'candidate.vhd:3:7:error: no declaration for "std_logic"' >&2
echo 'candidate.vhd:1:1:warning: unused' >&2
exit 1"#,
        );
        let work = tmp.path().join("work");
        let profile = CompilerProfile {
            binary_path: bin,
            extra_flags: vec!["--ieee=standard".into()],
            ..CompilerProfile::default()
        };
        let out = GhdlChecker::new(profile)
            .check("entity e is end;", &work)
            .unwrap();
        assert!(!out.report.pass);
        assert_eq!(out.report.error_count(), 1);
        assert_eq!(out.report.diagnostics[0].category, ErrorCategory::MissingType);
        let args = fs::read_to_string(work.join("args.txt")).unwrap();
        assert_eq!(args.trim(), "-s --std=08 --ieee=standard candidate.vhd");
        assert_eq!(
            fs::read_to_string(work.join(CANDIDATE_FILE)).unwrap(),
            "entity e is end;"
        );
    }

    #[cfg(unix)]
    #[test]
    fn nonzero_exit_without_diagnostics_is_unparseable() {
        let tmp = tempfile::tempdir().unwrap();
        let bin = fake_ghdl(tmp.path(), "echo 'internal failure' >&2\nexit 3");
        let profile = CompilerProfile {
            binary_path: bin,
            ..CompilerProfile::default()
        };
        let err = GhdlChecker::new(profile)
            .check("entity e is end;", &tmp.path().join("w"))
            .unwrap_err();
        let CompilerError::UnparseableOutput { raw } = &err else {
            panic!("unexpected {err:?}");
        };
        assert_eq!(raw.exit_code, 3);
        let out = report_or_synthetic(Err(err)).unwrap();
        assert!(!out.report.pass);
        assert!(out.report.diagnostics[0].message.contains("internal failure"));
    }

    #[cfg(unix)]
    #[test]
    fn timeout_kills_the_process() {
        let tmp = tempfile::tempdir().unwrap();
        let bin = fake_ghdl(tmp.path(), "sleep 5");
        let profile = CompilerProfile {
            binary_path: bin,
            timeout_secs: 1,
            ..CompilerProfile::default()
        };
        let started = Instant::now();
        let err = GhdlChecker::new(profile)
            .check("entity e is end;", &tmp.path().join("w"))
            .unwrap_err();
        assert!(matches!(err, CompilerError::Timeout(_)));
        assert!(started.elapsed() < Duration::from_secs(4));
    }

    #[cfg(unix)]
    #[test]
    fn passing_check_has_no_errors() {
        let tmp = tempfile::tempdir().unwrap();
        let bin = fake_ghdl(tmp.path(), "exit 0");
        let profile = CompilerProfile {
            binary_path: bin,
            ..CompilerProfile::default()
        };
        let report = check_syntax("entity e is end;", &profile, &tmp.path().join("w")).unwrap();
        assert!(report.pass);
        assert!(report.diagnostics.is_empty());
    }
}
