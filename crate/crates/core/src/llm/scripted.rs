//! Deterministic fixture-driven chat backend.
//!
//! Fixture file: a JSON array of records. A record is looked up by the SHA-256
//! digest of the message sequence; records may instead carry a `contains`
//! list, matched in file order when no digest entry exists.
//!
//! ```json
//! [
//!   {"digest": "3f1c...", "response": "ok"},
//!   {"contains": ["Summarize"], "response": "tried X; 2 errors remain"},
//!   {"contains": ["<code>"], "responses": ["variant a", "variant b"]}
//! ]
//! ```
//!
//! With `responses`, the call seed picks one entry.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{check_messages, count_tokens, ChatBackend, ChatMessage, Completion, DecodingParams, LlmError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contains: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub responses: Vec<String>,
}

impl FixtureRecord {
    pub fn digest(digest: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            digest: Some(digest.into()),
            contains: Vec::new(),
            response: Some(response.into()),
            responses: Vec::new(),
        }
    }

    pub fn contains<S: Into<String>>(needles: impl IntoIterator<Item = S>, response: impl Into<String>) -> Self {
        Self {
            digest: None,
            contains: needles.into_iter().map(Into::into).collect(),
            response: Some(response.into()),
            responses: Vec::new(),
        }
    }

    fn pick(&self, seed: u64, digest: &str) -> Option<&str> {
        if !self.responses.is_empty() {
            let mut h = Sha256::new();
            h.update(seed.to_le_bytes());
            h.update(digest.as_bytes());
            let bytes = h.finalize();
            let n = u64::from_le_bytes(bytes[..8].try_into().unwrap());
            return Some(&self.responses[(n % self.responses.len() as u64) as usize]);
        }
        self.response.as_deref()
    }
}

/// Stable digest of a message sequence (role and content of each message).
pub fn message_digest(messages: &[ChatMessage]) -> String {
    let mut h = Sha256::new();
    for m in messages {
        h.update(m.role.as_str().as_bytes());
        h.update([0x1f]);
        if let Some(id) = &m.tool_call_id {
            h.update(id.as_bytes());
        }
        h.update([0x1f]);
        h.update(m.content.as_bytes());
        h.update([0x1e]);
    }
    hex::encode(h.finalize())
}

pub struct ScriptedBackend {
    by_digest: HashMap<String, FixtureRecord>,
    rules: Vec<FixtureRecord>,
    source: String,
    calls: Mutex<Vec<String>>,
}

impl ScriptedBackend {
    pub fn from_records(records: Vec<FixtureRecord>) -> Self {
        Self::with_source(records, "inline")
    }

    fn with_source(records: Vec<FixtureRecord>, source: &str) -> Self {
        let mut by_digest = HashMap::new();
        let mut rules = Vec::new();
        for r in records {
            match &r.digest {
                Some(d) => {
                    by_digest.entry(d.clone()).or_insert(r);
                }
                None => rules.push(r),
            }
        }
        Self {
            by_digest,
            rules,
            source: source.to_string(),
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let err = |message: String| LlmError::Fixture {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let records: Vec<FixtureRecord> =
            serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        for (i, r) in records.iter().enumerate() {
            if r.response.is_none() && r.responses.is_empty() {
                return Err(err(format!("record {i} has no response")));
            }
            if r.digest.is_none() && r.contains.is_empty() {
                return Err(err(format!("record {i} has neither digest nor contains")));
            }
        }
        let source = path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self::with_source(records, &source))
    }

    /// Digests of every call served so far, in call order.
    pub fn call_log(&self) -> Vec<String> {
        self.calls.lock().unwrap().clone()
    }

    fn lookup(&self, messages: &[ChatMessage], digest: &str) -> Option<&FixtureRecord> {
        if let Some(r) = self.by_digest.get(digest) {
            return Some(r);
        }
        self.rules.iter().find(|r| {
            r.contains
                .iter()
                .all(|needle| messages.iter().any(|m| m.content.contains(needle.as_str())))
        })
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(
        &self,
        messages: &[ChatMessage],
        _decoding: &DecodingParams,
        seed: u64,
    ) -> Result<Completion, LlmError> {
        check_messages(messages)?;
        let digest = message_digest(messages);
        self.calls.lock().unwrap().push(digest.clone());
        let text = self
            .lookup(messages, &digest)
            .and_then(|r| r.pick(seed, &digest))
            .ok_or_else(|| LlmError::FixtureMiss {
                digest: digest.clone(),
            })?
            .to_string();
        Ok(Completion {
            prompt_tokens: messages.iter().map(|m| count_tokens(&m.content)).sum(),
            completion_tokens: count_tokens(&text),
            text,
            backend_id: self.id(),
        })
    }

    fn id(&self) -> String {
        format!("scripted:{}", self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msgs(text: &str) -> Vec<ChatMessage> {
        vec![ChatMessage::system("sys"), ChatMessage::user(text)]
    }

    #[test]
    fn digest_passthrough() {
        let d1 = message_digest(&msgs("d1"));
        let backend = ScriptedBackend::from_records(vec![FixtureRecord::digest(d1, "ok")]);
        let c = backend
            .complete(&msgs("d1"), &DecodingParams::default(), 0)
            .unwrap();
        assert_eq!(c.text, "ok");
        assert_eq!(c.completion_tokens, 1);
    }

    #[test]
    fn unknown_digest_is_a_miss() {
        let backend = ScriptedBackend::from_records(vec![]);
        let err = backend
            .complete(&msgs("other"), &DecodingParams::default(), 0)
            .unwrap_err();
        let expected = message_digest(&msgs("other"));
        assert!(matches!(err, LlmError::FixtureMiss { ref digest } if *digest == expected));
        assert!(err.to_string().contains(&expected));
    }

    #[test]
    fn digest_beats_contains_rules() {
        let d = message_digest(&msgs("needle here"));
        let backend = ScriptedBackend::from_records(vec![
            FixtureRecord::contains(["needle"], "rule"),
            FixtureRecord::digest(d, "exact"),
        ]);
        let dec = DecodingParams::default();
        assert_eq!(backend.complete(&msgs("needle here"), &dec, 0).unwrap().text, "exact");
        assert_eq!(backend.complete(&msgs("a needle"), &dec, 0).unwrap().text, "rule");
        assert_eq!(backend.call_log().len(), 2);
    }

    #[test]
    fn seeded_choice_is_deterministic() {
        let rec = FixtureRecord {
            digest: None,
            contains: vec!["x".into()],
            response: None,
            responses: (0..8).map(|i| format!("r{i}")).collect(),
        };
        let backend = ScriptedBackend::from_records(vec![rec]);
        let dec = DecodingParams::default();
        let pick = |seed| backend.complete(&msgs("x"), &dec, seed).unwrap().text;
        assert_eq!(pick(3), pick(3));
        let distinct: std::collections::HashSet<_> = (0..32).map(pick).collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn input_messages_unchanged() {
        let backend = ScriptedBackend::from_records(vec![FixtureRecord::contains(["u"], "r")]);
        let m = msgs("u");
        let before = m.clone();
        backend.complete(&m, &DecodingParams::default(), 0).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn load_rejects_bad_records() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("f.json");
        fs::write(&p, r#"[{"contains": ["a"]}]"#).unwrap();
        assert!(ScriptedBackend::load(&p).is_err());
        fs::write(&p, r#"[{"digest": "ab", "response": "r"}]"#).unwrap();
        assert!(ScriptedBackend::load(&p).is_ok());
    }
}
