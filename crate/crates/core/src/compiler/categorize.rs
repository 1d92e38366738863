//! Keyword table mapping compiler messages onto [`ErrorCategory`].

use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use serde::Deserialize;

use super::CompilerError;
use crate::model::{Diagnostic, ErrorCategory};

const BUNDLED_TABLE: &str = include_str!("../../data/categories.json");

static DEFAULT_TABLE: LazyLock<KeywordTable> =
    LazyLock::new(|| KeywordTable::from_json(BUNDLED_TABLE).expect("bundled keyword table"));

#[derive(Debug, Clone, Deserialize)]
struct TableFile {
    version: u32,
    rules: Vec<RuleFile>,
}

#[derive(Debug, Clone, Deserialize)]
struct RuleFile {
    category: ErrorCategory,
    keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
struct Rule {
    category: ErrorCategory,
    keywords: Vec<String>,
}

/// Ordered, first-match-wins category rules.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordTable {
    pub version: u32,
    rules: Vec<Rule>,
}

impl KeywordTable {
    pub fn bundled() -> &'static KeywordTable {
        &DEFAULT_TABLE
    }

    pub fn from_json(text: &str) -> Result<Self, CompilerError> {
        let file: TableFile = serde_json::from_str(text)
            .map_err(|e| CompilerError::KeywordTable(e.to_string()))?;
        if file.version != 1 {
            return Err(CompilerError::KeywordTable(format!(
                "unsupported keyword table version {}",
                file.version
            )));
        }
        let rules = file
            .rules
            .into_iter()
            .map(|r| Rule {
                category: r.category,
                keywords: r.keywords.iter().map(|k| k.to_lowercase()).collect(),
            })
            .collect();
        Ok(Self {
            version: file.version,
            rules,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CompilerError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CompilerError::KeywordTable(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn classify(&self, message: &str) -> ErrorCategory {
        let lower = message.to_lowercase();
        self.rules
            .iter()
            .find(|rule| rule.keywords.iter().any(|k| contains_keyword(&lower, k)))
            .map_or(ErrorCategory::Other, |rule| rule.category)
    }
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Substring search that requires word boundaries at alphanumeric keyword edges,
/// so `port` does not match `report`.
fn contains_keyword(haystack: &str, keyword: &str) -> bool {
    if keyword.is_empty() {
        return false;
    }
    let hay = haystack.as_bytes();
    let kw = keyword.as_bytes();
    let check_start = is_word_byte(kw[0]);
    let check_end = is_word_byte(kw[kw.len() - 1]);
    haystack.match_indices(keyword).any(|(start, _)| {
        let end = start + kw.len();
        let start_ok = !check_start || start == 0 || !is_word_byte(hay[start - 1]);
        let end_ok = !check_end || end == hay.len() || !is_word_byte(hay[end]);
        start_ok && end_ok
    })
}

/// Category of a diagnostic under the bundled keyword table.
pub fn categorize(diag: &Diagnostic) -> ErrorCategory {
    DEFAULT_TABLE.classify(&diag.message)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Severity;

    fn diag(message: &str) -> Diagnostic {
        Diagnostic {
            file: "f.vhd".into(),
            line: 1,
            column: 1,
            severity: Severity::Error,
            message: message.into(),
            category: ErrorCategory::Other,
        }
    }

    #[test]
    fn documented_examples() {
        assert_eq!(
            categorize(&diag(r#"library "ieee" not found"#)),
            ErrorCategory::MissingLibrary
        );
        assert_eq!(
            categorize(&diag(r#"no declaration for "std_logic""#)),
            ErrorCategory::MissingType
        );
        assert_eq!(categorize(&diag("syntax error")), ErrorCategory::Other);
    }

    #[test]
    fn each_trigger_category_is_reachable() {
        let t = KeywordTable::bundled();
        assert_eq!(t.classify(r#"no declaration for "ieee""#), ErrorCategory::MissingLibrary);
        assert_eq!(t.classify(r#"no declaration for "rising_edge""#), ErrorCategory::MissingUse);
        assert_eq!(t.classify(r#"no declaration for "unsigned""#), ErrorCategory::MissingType);
        assert_eq!(t.classify(r#"no port "dout" in entity "fir""#), ErrorCategory::MissingPort);
        assert_eq!(
            t.classify(r#"missing "end process" for process started at line 4"#),
            ErrorCategory::MissingProcess
        );
    }

    #[test]
    fn first_match_wins_and_case_is_ignored() {
        let t = KeywordTable::bundled();
        // mentions both library and port: library is listed first
        assert_eq!(
            t.classify("PORT clause references LIBRARY unit"),
            ErrorCategory::MissingLibrary
        );
        assert_eq!(t.classify("Process without Sensitivity List"), ErrorCategory::MissingProcess);
    }

    #[test]
    fn word_boundaries_respected() {
        let t = KeywordTable::bundled();
        assert_eq!(t.classify("report statement misplaced"), ErrorCategory::Other);
        assert_eq!(t.classify("unsupported construct"), ErrorCategory::Other);
        assert_eq!(t.classify("librarys are odd"), ErrorCategory::Other);
    }

    #[test]
    fn custom_table_overrides() {
        let t = KeywordTable::from_json(
            r#"{"version":1,"rules":[{"category":"missing_port","keywords":["syntax"]}]}"#,
        )
        .unwrap();
        assert_eq!(t.classify("syntax error"), ErrorCategory::MissingPort);
        assert!(KeywordTable::from_json(r#"{"version":9,"rules":[]}"#).is_err());
    }
}
