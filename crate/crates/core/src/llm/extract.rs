use std::sync::LazyLock;

use regex::Regex;

use super::LlmError;

static FENCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)```[^\n`]*\n(.*?)```").unwrap());
static BARE_IDENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_-]*$").unwrap());

fn trim_blank_lines(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.iter().position(|l| !l.trim().is_empty());
    let end = lines.iter().rposition(|l| !l.trim().is_empty());
    match (start, end) {
        (Some(s), Some(e)) => {
            let mut body = lines[s..=e].join("\n");
            let trimmed_len = body.trim_end().len();
            body.truncate(trimmed_len);
            // a single-line block may carry inline padding: `<t> code </t>`
            if s == e {
                body = body.trim().to_string();
            }
            body
        }
        _ => String::new(),
    }
}

/// Contents of every well-formed `<tag>...</tag>` block, in order.
pub fn tagged_blocks<'a>(text: &'a str, tag: &str) -> Vec<&'a str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let lower = text.to_ascii_lowercase();
    let (open_l, close_l) = (open.to_ascii_lowercase(), close.to_ascii_lowercase());
    let mut blocks = Vec::new();
    let mut pos = 0;
    while let Some(o) = lower[pos..].find(&open_l) {
        let body_start = pos + o + open_l.len();
        let Some(c) = lower[body_start..].find(&close_l) else {
            break;
        };
        let body_end = body_start + c;
        blocks.push(&text[body_start..body_end]);
        pos = body_end + close_l.len();
    }
    blocks
}

/// Returns the last `<tag>` block, else the last fenced code block.
pub fn extract_tagged_code(completion_text: &str, tag: &str) -> Result<String, LlmError> {
    if !BARE_IDENT.is_match(tag) {
        return Err(LlmError::InvalidTag(tag.to_string()));
    }
    if let Some(block) = tagged_blocks(completion_text, tag).last() {
        let code = trim_blank_lines(block);
        if !code.is_empty() {
            return Ok(code);
        }
    }
    if let Some(caps) = FENCE.captures_iter(completion_text).last() {
        let code = trim_blank_lines(&caps[1]);
        if !code.is_empty() {
            return Ok(code);
        }
    }
    Err(LlmError::NoCodeFound)
}
