use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PolicyKind;
use crate::compiler::CompilerProfile;
use crate::llm::{BackendKind, BackendProfile, DecodingParams};

/// Schema version accepted in the `spec_version` key.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    NotFound(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config at `{field}`: {message}")]
    Malformed { field: String, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    /// Dotted path of the offending key, when one is known.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Malformed { field, .. } | ConfigError::Invalid { field, .. } => {
                Some(field)
            }
            _ => None,
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompilerKind {
    /// The real GHDL binary.
    Ghdl,
    /// In-process structural checker for offline runs.
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompilerConfig {
    #[serde(default = "default_compiler_kind")]
    pub kind: CompilerKind,
    #[serde(default)]
    pub ghdl: CompilerProfile,
    /// Replacement category keyword table; the bundled table is used when unset.
    #[serde(default)]
    pub keyword_table: Option<PathBuf>,
}

fn default_compiler_kind() -> CompilerKind {
    CompilerKind::Ghdl
}

impl Default for CompilerConfig {
    fn default() -> Self {
        Self {
            kind: default_compiler_kind(),
            ghdl: CompilerProfile::default(),
            keyword_table: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifierMode {
    Mock,
    ExternalCommand,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierConfig {
    #[serde(default = "default_verifier_mode")]
    pub mode: VerifierMode,
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default = "default_verifier_timeout")]
    pub timeout_secs: u64,
}

fn default_verifier_mode() -> VerifierMode {
    VerifierMode::Mock
}

fn default_verifier_timeout() -> u64 {
    600
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            mode: default_verifier_mode(),
            command: None,
            timeout_secs: default_verifier_timeout(),
        }
    }
}

/// Everything a batch run needs, with the published reproducibility defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub spec_version: u32,
    #[serde(default = "default_runs")]
    pub runs_per_function: u32,
    #[serde(default = "default_candidates")]
    pub candidates_per_function: u32,
    #[serde(default = "default_iterations")]
    pub max_iterations: u32,
    #[serde(default = "default_retrieval_k")]
    pub retrieval_k: u32,
    #[serde(default = "default_exemplar_budget")]
    pub exemplar_token_budget: usize,
    #[serde(default = "default_summary_budget")]
    pub summary_token_budget: usize,
    #[serde(default)]
    pub decoding: DecodingParams,
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "BackendProfile::default_chat")]
    pub chat_backend: BackendProfile,
    #[serde(default = "BackendProfile::default_embedding")]
    pub embedding_backend: BackendProfile,
    #[serde(default)]
    pub index_path: Option<PathBuf>,
    /// Line-tier table used when truncating exemplars; bundled table when unset.
    #[serde(default)]
    pub tier_table: Option<PathBuf>,
    /// Expert-flow guidance text; bundled asset when unset.
    #[serde(default)]
    pub expert_prompt_path: Option<PathBuf>,
    #[serde(default)]
    pub compiler: CompilerConfig,
    #[serde(default)]
    pub verifier: VerifierConfig,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}
fn default_runs() -> u32 {
    12
}
fn default_candidates() -> u32 {
    3
}
fn default_iterations() -> u32 {
    10
}
fn default_retrieval_k() -> u32 {
    3
}
fn default_exemplar_budget() -> usize {
    1200
}
fn default_summary_budget() -> usize {
    120
}
fn default_policy() -> PolicyKind {
    PolicyKind::Mcp
}
fn default_workers() -> usize {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec_version: CONFIG_VERSION,
            runs_per_function: default_runs(),
            candidates_per_function: default_candidates(),
            max_iterations: default_iterations(),
            retrieval_k: default_retrieval_k(),
            exemplar_token_budget: default_exemplar_budget(),
            summary_token_budget: default_summary_budget(),
            decoding: DecodingParams::default(),
            policy: default_policy(),
            seed: 0,
            chat_backend: BackendProfile::default_chat(),
            embedding_backend: BackendProfile::default_embedding(),
            index_path: None,
            tier_table: None,
            expert_prompt_path: None,
            compiler: CompilerConfig::default(),
            verifier: VerifierConfig::default(),
            workers: default_workers(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.spec_version != CONFIG_VERSION {
            return Err(invalid(
                "spec_version",
                format!("unsupported version {} (expected {CONFIG_VERSION})", self.spec_version),
            ));
        }
        let positive = [
            ("runs_per_function", self.runs_per_function as usize),
            ("candidates_per_function", self.candidates_per_function as usize),
            ("max_iterations", self.max_iterations as usize),
            ("retrieval_k", self.retrieval_k as usize),
            ("exemplar_token_budget", self.exemplar_token_budget),
            ("summary_token_budget", self.summary_token_budget),
            ("workers", self.workers),
        ];
        for (field, value) in positive {
            if value == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        if self.summary_token_budget >= self.exemplar_token_budget {
            return Err(invalid(
                "summary_token_budget",
                "must be smaller than exemplar_token_budget",
            ));
        }
        self.decoding
            .validate()
            .map_err(|(field, msg)| invalid(&format!("decoding.{field}"), msg))?;
        for (name, profile) in [
            ("chat_backend", &self.chat_backend),
            ("embedding_backend", &self.embedding_backend),
        ] {
            profile
                .validate()
                .map_err(|(field, msg)| invalid(&format!("{name}.{field}"), msg))?;
        }
        if self.chat_backend.kind == BackendKind::Hashing {
            return Err(invalid(
                "chat_backend.kind",
                "the hashing backend only produces embeddings",
            ));
        }
        if self.compiler.ghdl.timeout_secs == 0 {
            return Err(invalid("compiler.ghdl.timeout_secs", "must be positive"));
        }
        if self.compiler.ghdl.std_flag.trim().is_empty() {
            return Err(invalid("compiler.ghdl.std_flag", "must not be empty"));
        }
        if self.verifier.mode == VerifierMode::ExternalCommand
            && self.verifier.command.as_deref().map_or(true, |c| c.trim().is_empty())
        {
            return Err(invalid(
                "verifier.command",
                "required when verifier.mode is external-command",
            ));
        }
        Ok(())
    }

    /// Resolves relative file references against `base`.
    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.index_path,
            &mut self.tier_table,
            &mut self.expert_prompt_path,
            &mut self.compiler.keyword_table,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
        for profile in [&mut self.chat_backend, &mut self.embedding_backend] {
            if profile.kind == BackendKind::Scripted {
                let mut p = PathBuf::from(&profile.model_id);
                join(&mut p);
                profile.model_id = p.to_string_lossy().into_owned();
            }
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses a config document; relative paths are resolved against `base_dir`.
pub fn config_from_str(text: &str, base_dir: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let message = inner.to_string();
        let field = match unknown_field_name(&message) {
            Some(name) if path == "." => name,
            Some(name) if !path.ends_with(&name) => format!("{path}.{name}"),
            _ => path,
        };
        ConfigError::Malformed { field, message }
    })?;
    if let Some(base) = base_dir {
        cfg.resolve_paths(base);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn unknown_field_name(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

/// Reads and validates a JSON run configuration.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    if !path.exists() {
        return Err(ConfigError::NotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().filter(|p| !p.as_os_str().is_empty());
    config_from_str(&text, Some(base.unwrap_or_else(|| Path::new("."))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = config_from_str("{}", None).unwrap();
        assert_eq!(cfg.runs_per_function, 12);
        assert_eq!(cfg.candidates_per_function, 3);
        assert_eq!(cfg.max_iterations, 10);
        assert_eq!(cfg.retrieval_k, 3);
        assert_eq!(cfg.exemplar_token_budget, 1200);
        assert_eq!(cfg.summary_token_budget, 120);
        assert_eq!(cfg.decoding.temperature, 0.6);
        assert_eq!(cfg.decoding.top_p, 1.0);
        assert_eq!(cfg.decoding.max_new_tokens, None);
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn zero_iterations_names_field() {
        let err = config_from_str(r#"{"max_iterations": 0}"#, None).unwrap_err();
        assert_eq!(err.field(), Some("max_iterations"));
        assert!(err.to_string().contains("max_iterations"));
    }

    #[test]
    fn override_keeps_other_defaults() {
        let cfg = config_from_str(r#"{"retrieval_k": 5}"#, None).unwrap();
        assert_eq!(cfg.retrieval_k, 5);
        let expected = RunConfig {
            retrieval_k: 5,
            ..RunConfig::default()
        };
        assert_eq!(cfg, expected);
    }

    #[test]
    fn unknown_keys_rejected_with_name() {
        let err = config_from_str(r#"{"decoding": {"temprature": 0.2}}"#, None).unwrap_err();
        assert_eq!(err.field(), Some("decoding.temprature"));
        let err = config_from_str(r#"{"bogus": 1}"#, None).unwrap_err();
        assert_eq!(err.field(), Some("bogus"));
    }

    #[test]
    fn type_errors_name_the_field() {
        let err = config_from_str(r#"{"retrieval_k": "three"}"#, None).unwrap_err();
        assert_eq!(err.field(), Some("retrieval_k"));
        assert!(config_from_str("{", None).is_err());
    }

    #[test]
    fn version_and_budget_constraints() {
        let err = config_from_str(r#"{"spec_version": 2}"#, None).unwrap_err();
        assert_eq!(err.field(), Some("spec_version"));
        let err = config_from_str(r#"{"summary_token_budget": 1200}"#, None).unwrap_err();
        assert_eq!(err.field(), Some("summary_token_budget"));
        let err = config_from_str(r#"{"decoding": {"top_p": 0.0}}"#, None).unwrap_err();
        assert_eq!(err.field(), Some("decoding.top_p"));
        let err = config_from_str(r#"{"verifier": {"mode": "external-command"}}"#, None)
            .unwrap_err();
        assert_eq!(err.field(), Some("verifier.command"));
    }

    #[test]
    fn serialized_config_round_trips() {
        let cfg = config_from_str(
            r#"{"policy": "hybrid", "seed": 7, "compiler": {"kind": "mock"}}"#,
            None,
        )
        .unwrap();
        let again = config_from_str(&cfg.to_json_pretty(), None).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn missing_file_is_reported() {
        let err = parse_config(Path::new("/nonexistent/run.json")).unwrap_err();
        assert!(matches!(err, ConfigError::NotFound(_)));
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let cfg = config_from_str(
            r#"{"index_path": "idx.json", "chat_backend": {"kind": "scripted", "model_id": "chat.json"}}"#,
            Some(Path::new("/data/exp")),
        )
        .unwrap();
        assert_eq!(cfg.index_path.unwrap(), Path::new("/data/exp/idx.json"));
        assert_eq!(cfg.chat_backend.model_id, "/data/exp/chat.json");
    }
}
