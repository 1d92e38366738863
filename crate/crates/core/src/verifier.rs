//! Downstream verifier hook standing in for synthesis and testbench simulation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use crate::model::{Verdict, VerifierConfig, VerifierMode};

/// File the mock verifier compares against, inside each case directory.
pub const EXPECTED_FILE: &str = "expected.vhd";

pub trait Verifier: Send + Sync {
    /// Judges a syntactically passing unit. `workdir` is scratch space.
    fn verify(&self, case_id: &str, vhdl: &str, workdir: &Path) -> Verdict;

    /// False when every verdict would be [`Verdict::Unavailable`].
    fn is_enabled(&self) -> bool {
        true
    }
}

/// Offline stand-in. With `<root>/<case>/expected.vhd` present the unit passes
/// iff its token stream (case-insensitive, comments removed) matches; without
/// one every unit passes.
#[derive(Debug, Clone)]
pub struct MockVerifier {
    pub dataset_root: Option<PathBuf>,
}

fn normalized_tokens(vhdl: &str) -> Vec<String> {
    vhdl.lines()
        .map(|l| l.split("--").next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(str::to_ascii_lowercase)
        .collect()
}

impl Verifier for MockVerifier {
    fn verify(&self, case_id: &str, vhdl: &str, _workdir: &Path) -> Verdict {
        let expected = self
            .dataset_root
            .as_ref()
            .map(|root| root.join(case_id).join(EXPECTED_FILE))
            .and_then(|p| fs::read_to_string(p).ok());
        match expected {
            None => Verdict::SimPass,
            Some(exp) if normalized_tokens(&exp) == normalized_tokens(vhdl) => Verdict::SimPass,
            Some(_) => Verdict::SimFail,
        }
    }
}

/// Runs `<cmd...> <file.vhd>`: exit 0 → SimPass, 1 → SimFail, else Unavailable.
#[derive(Debug, Clone)]
pub struct CommandVerifier {
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl Verifier for CommandVerifier {
    fn verify(&self, case_id: &str, vhdl: &str, workdir: &Path) -> Verdict {
        let Some((program, args)) = self.command.split_first() else {
            return Verdict::Unavailable;
        };
        if fs::create_dir_all(workdir).is_err() {
            return Verdict::Unavailable;
        }
        let file = workdir.join(format!("{}.vhd", case_id.replace(['/', '\\'], "_")));
        if fs::write(&file, vhdl).is_err() {
            return Verdict::Unavailable;
        }
        let child = Command::new(program)
            .args(args)
            .arg(&file)
            .current_dir(workdir)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn();
        let mut child = match child {
            Ok(c) => c,
            Err(e) => {
                log::warn!("verifier command `{program}` unavailable: {e}");
                return Verdict::Unavailable;
            }
        };
        match child.wait_timeout(self.timeout) {
            Ok(Some(status)) => match status.code() {
                Some(0) => Verdict::SimPass,
                Some(1) => Verdict::SimFail,
                _ => Verdict::Unavailable,
            },
            Ok(None) => {
                let _ = child.kill();
                let _ = child.wait();
                Verdict::Unavailable
            }
            Err(_) => Verdict::Unavailable,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DisabledVerifier;

impl Verifier for DisabledVerifier {
    fn verify(&self, _: &str, _: &str, _: &Path) -> Verdict {
        Verdict::Unavailable
    }

    fn is_enabled(&self) -> bool {
        false
    }
}

pub fn build_verifier(cfg: &VerifierConfig, dataset_root: Option<&Path>) -> Box<dyn Verifier> {
    match cfg.mode {
        VerifierMode::Mock => Box::new(MockVerifier {
            dataset_root: dataset_root.map(Path::to_path_buf),
        }),
        VerifierMode::ExternalCommand => Box::new(CommandVerifier {
            command: cfg
                .command
                .as_deref()
                .unwrap_or_default()
                .split_whitespace()
                .map(str::to_string)
                .collect(),
            timeout: Duration::from_secs(cfg.timeout_secs),
        }),
        VerifierMode::Disabled => Box::new(DisabledVerifier),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_without_golden_passes() {
        let v = MockVerifier { dataset_root: None };
        assert_eq!(v.verify("c", "x", Path::new(".")), Verdict::SimPass);
    }

    #[test]
    fn mock_compares_normalized_tokens() {
        let tmp = tempfile::tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("c")).unwrap();
        fs::write(tmp.path().join("c").join(EXPECTED_FILE), "ENTITY e IS\nEND; -- done\n").unwrap();
        let v = MockVerifier {
            dataset_root: Some(tmp.path().to_path_buf()),
        };
        assert_eq!(v.verify("c", "entity e is end;", tmp.path()), Verdict::SimPass);
        assert_eq!(v.verify("c", "entity f is end;", tmp.path()), Verdict::SimFail);
    }

    #[cfg(unix)]
    #[test]
    fn command_exit_codes_map_to_verdicts() {
        let tmp = tempfile::tempdir().unwrap();
        let run = |code: &str| {
            CommandVerifier {
                command: vec!["sh".into(), "-c".into(), format!("exit {code}"), "sh".into()],
                timeout: Duration::from_secs(5),
            }
            .verify("c", "x", tmp.path())
        };
        assert_eq!(run("0"), Verdict::SimPass);
        assert_eq!(run("1"), Verdict::SimFail);
        assert_eq!(run("3"), Verdict::Unavailable);
        let missing = CommandVerifier {
            command: vec!["/nonexistent/verifier".into()],
            timeout: Duration::from_secs(1),
        };
        assert_eq!(missing.verify("c", "x", tmp.path()), Verdict::Unavailable);
    }

    #[test]
    fn disabled_is_unavailable() {
        let v = build_verifier(
            &VerifierConfig {
                mode: VerifierMode::Disabled,
                ..VerifierConfig::default()
            },
            None,
        );
        assert!(!v.is_enabled());
        assert_eq!(v.verify("c", "x", Path::new(".")), Verdict::Unavailable);
    }
}
