//! Token counting used by every budget rule.

/// Counts and truncates text in model tokens.
///
/// The default counter treats each maximal run of non-whitespace characters
/// as one token; a model tokenizer can be plugged in behind this trait.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> usize;

    /// Longest prefix of `text` holding at most `max` tokens.
    fn truncate<'a>(&self, text: &'a str, max: usize) -> &'a str;

    fn id(&self) -> &str;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }

    fn truncate<'a>(&self, text: &'a str, max: usize) -> &'a str {
        let mut seen = 0;
        let mut in_token = false;
        for (i, ch) in text.char_indices() {
            if ch.is_whitespace() {
                if in_token && seen == max {
                    return &text[..i];
                }
                in_token = false;
            } else if !in_token {
                if seen == max {
                    return text[..i].trim_end();
                }
                in_token = true;
                seen += 1;
            }
        }
        text
    }

    fn id(&self) -> &str {
        "whitespace"
    }
}

/// Token count under the default whitespace counter.
pub fn count_tokens(text: &str) -> usize {
    WhitespaceCounter.count(text)
}

/// Prefix of `text` with at most `max` tokens under the default counter.
pub fn truncate_tokens(text: &str, max: usize) -> &str {
    WhitespaceCounter.truncate(text, max)
}
