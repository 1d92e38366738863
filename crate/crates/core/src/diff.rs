//! Line-based unified diffs for the audit log.
//!
//! Every code rewrite is stored as a diff against the previous version so the
//! final code of a run can be rebuilt from the original candidate.

use std::fmt::Write as _;

use thiserror::Error;

const CONTEXT: usize = 3;
const NO_NEWLINE: &str = "\\ No newline at end of file";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatchError {
    #[error("malformed hunk header `{0}`")]
    BadHeader(String),
    #[error("patch line {line}: {message}")]
    Mismatch { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Equal(usize, usize),
    Delete(usize),
    Insert(usize),
}

/// Splits keeping track of whether the final line was newline-terminated.
fn split_lines(text: &str) -> (Vec<&str>, bool) {
    if text.is_empty() {
        return (Vec::new(), true);
    }
    let terminated = text.ends_with('\n');
    let body = if terminated { &text[..text.len() - 1] } else { text };
    (body.split('\n').collect(), terminated)
}

/// LCS edit script. Inputs here are a few hundred lines, so the quadratic
/// table is fine.
fn edit_script(a: &[&str], b: &[&str]) -> Vec<Op> {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let a_mid = &a[prefix..a.len() - suffix];
    let b_mid = &b[prefix..b.len() - suffix];
    let (n, m) = (a_mid.len(), b_mid.len());
    let mut table = vec![0u32; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[at(i, j)] = if a_mid[i] == b_mid[j] {
                table[at(i + 1, j + 1)] + 1
            } else {
                table[at(i + 1, j)].max(table[at(i, j + 1)])
            };
        }
    }
    let mut ops: Vec<Op> = (0..prefix).map(|i| Op::Equal(i, i)).collect();
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && a_mid[i] == b_mid[j] {
            ops.push(Op::Equal(prefix + i, prefix + j));
            i += 1;
            j += 1;
        } else if i < n && (j == m || table[at(i + 1, j)] >= table[at(i, j + 1)]) {
            ops.push(Op::Delete(prefix + i));
            i += 1;
        } else {
            ops.push(Op::Insert(prefix + j));
            j += 1;
        }
    }
    ops.extend((0..suffix).map(|k| Op::Equal(prefix + n + k, prefix + m + k)));
    ops
}

/// Unified diff from `old` to `new` with three lines of context.
///
/// Returns an empty string when the texts are identical.
pub fn unified_diff(old: &str, new: &str, old_name: &str, new_name: &str) -> String {
    if old == new {
        return String::new();
    }
    let (a, a_term) = split_lines(old);
    let (b, b_term) = split_lines(new);
    let ops = edit_script(&a, &b);

    // A line whose terminator differs between the sides counts as changed so
    // the no-newline marker can be attached to it.
    let terminated = |idx: usize, len: usize, term: bool| idx + 1 < len || term;
    let ops: Vec<Op> = ops
        .into_iter()
        .flat_map(|op| match op {
            Op::Equal(i, j) if terminated(i, a.len(), a_term) != terminated(j, b.len(), b_term) => {
                vec![Op::Delete(i), Op::Insert(j)]
            }
            other => vec![other],
        })
        .collect();

    let changes: Vec<usize> = ops
        .iter()
        .enumerate()
        .filter(|(_, op)| !matches!(op, Op::Equal(..)))
        .map(|(k, _)| k)
        .collect();
    let mut out = format!("--- {old_name}\n+++ {new_name}\n");
    let mut k = 0;
    while k < changes.len() {
        let start = changes[k].saturating_sub(CONTEXT);
        let mut end = changes[k];
        while k < changes.len() && changes[k] <= end + 2 * CONTEXT {
            end = changes[k];
            k += 1;
        }
        let end = (end + CONTEXT).min(ops.len() - 1);
        let hunk = &ops[start..=end];

        let (mut a_start, mut a_len, mut b_start, mut b_len) = (None, 0, None, 0);
        for op in hunk {
            match *op {
                Op::Equal(i, j) => {
                    a_start.get_or_insert(i);
                    b_start.get_or_insert(j);
                    a_len += 1;
                    b_len += 1;
                }
                Op::Delete(i) => {
                    a_start.get_or_insert(i);
                    a_len += 1;
                }
                Op::Insert(j) => {
                    b_start.get_or_insert(j);
                    b_len += 1;
                }
            }
        }
        let a_pos = hunk_start(a_start, a_len, &ops[..start], true);
        let b_pos = hunk_start(b_start, b_len, &ops[..start], false);
        let _ = writeln!(out, "@@ -{a_pos},{a_len} +{b_pos},{b_len} @@");
        for op in hunk {
            let (prefix, line, last, term) = match *op {
                Op::Equal(i, _) => (' ', a[i], i + 1 == a.len(), a_term),
                Op::Delete(i) => ('-', a[i], i + 1 == a.len(), a_term),
                Op::Insert(j) => ('+', b[j], j + 1 == b.len(), b_term),
            };
            let _ = writeln!(out, "{prefix}{line}");
            if last && !term {
                let _ = writeln!(out, "{NO_NEWLINE}");
            }
        }
    }
    out
}

/// 1-based start line; for empty ranges this is the line before the hunk.
fn hunk_start(first: Option<usize>, len: usize, before: &[Op], old_side: bool) -> usize {
    match first {
        Some(i) if len > 0 => i + 1,
        _ => before
            .iter()
            .filter(|op| match op {
                Op::Equal(..) => true,
                Op::Delete(_) => old_side,
                Op::Insert(_) => !old_side,
            })
            .count(),
    }
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    match s.split_once(',') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

/// Applies a diff produced by [`unified_diff`] to `old`.
pub fn apply_patch(old: &str, patch: &str) -> Result<String, PatchError> {
    if patch.is_empty() {
        return Ok(old.to_string());
    }
    let (a, a_term) = split_lines(old);
    let mut out: Vec<&str> = Vec::new();
    let mut out_term = a_term;
    let mut cursor = 0;
    let patch_lines: Vec<&str> = patch.lines().collect();
    let mut p = 0;
    if patch_lines.first().is_some_and(|l| l.starts_with("--- ")) {
        p = 1;
        if patch_lines.get(1).is_some_and(|l| l.starts_with("+++ ")) {
            p = 2;
        }
    }
    while p < patch_lines.len() {
        let line = patch_lines[p];
        let header = line
            .strip_prefix("@@ -")
            .and_then(|r| r.strip_suffix(" @@"))
            .ok_or_else(|| PatchError::BadHeader(line.to_string()))?;
        let (old_range, _) = header
            .split_once(" +")
            .ok_or_else(|| PatchError::BadHeader(line.to_string()))?;
        let (a_pos, a_len) = parse_range(old_range).ok_or_else(|| PatchError::BadHeader(line.to_string()))?;
        let hunk_start = if a_len == 0 { a_pos } else { a_pos - 1 };
        if hunk_start < cursor || hunk_start > a.len() {
            return Err(PatchError::Mismatch {
                line: p + 1,
                message: "hunk out of order".into(),
            });
        }
        out.extend_from_slice(&a[cursor..hunk_start]);
        cursor = hunk_start;
        p += 1;
        while p < patch_lines.len() && !patch_lines[p].starts_with("@@") {
            let l = patch_lines[p];
            let mismatch = |message: &str| PatchError::Mismatch {
                line: p + 1,
                message: message.to_string(),
            };
            if l == NO_NEWLINE {
                // only markers on the new side matter for the output
                if !patch_lines[p - 1].starts_with('-') {
                    out_term = false;
                }
                p += 1;
                continue;
            }
            let (tag, body) = l.split_at(l.chars().next().map_or(0, char::len_utf8));
            match tag {
                " " | "-" => {
                    if a.get(cursor) != Some(&body) {
                        return Err(mismatch("context does not match"));
                    }
                    if tag == " " {
                        out.push(body);
                        out_term = true;
                    }
                    cursor += 1;
                }
                "+" => {
                    out.push(body);
                    out_term = true;
                }
                "" => {
                    // blank context line written without its leading space
                    if a.get(cursor) != Some(&"") {
                        return Err(mismatch("context does not match"));
                    }
                    out.push("");
                    out_term = true;
                    cursor += 1;
                }
                _ => return Err(mismatch("unexpected line prefix")),
            }
            p += 1;
        }
    }
    if cursor < a.len() {
        out.extend_from_slice(&a[cursor..]);
        out_term = a_term;
    }
    if out.is_empty() {
        return Ok(String::new());
    }
    let mut text = out.join("\n");
    if out_term {
        text.push('\n');
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round_trip(a: &str, b: &str) {
        let d = unified_diff(a, b, "a", "b");
        assert_eq!(apply_patch(a, &d).as_deref(), Ok(b), "diff:\n{d}");
    }

    #[test]
    fn identical_texts_give_empty_diff() {
        assert_eq!(unified_diff("x\n", "x\n", "a", "b"), "");
        assert_eq!(apply_patch("x\n", "").unwrap(), "x\n");
    }

    #[test]
    fn single_line_change() {
        let d = unified_diff("a\nb\nc\n", "a\nB\nc\n", "old", "new");
        assert_eq!(d, "--- old\n+++ new\n@@ -1,3 +1,3 @@\n a\n-b\n+B\n c\n");
    }

    #[test]
    fn pure_insertion_into_empty() {
        let d = unified_diff("", "x\ny\n", "a", "b");
        assert_eq!(d, "--- a\n+++ b\n@@ -0,0 +1,2 @@\n+x\n+y\n");
        round_trip("", "x\ny\n");
        round_trip("x\ny\n", "");
    }

    #[test]
    fn missing_final_newline() {
        let d = unified_diff("a\nb", "a\nb\n", "a", "b");
        assert!(d.contains(NO_NEWLINE));
        round_trip("a\nb", "a\nb\n");
        round_trip("a\nb\n", "a\nb");
        round_trip("a", "b");
    }

    #[test]
    fn distant_changes_split_hunks() {
        let a: String = (0..30).map(|i| format!("l{i}\n")).collect();
        let b = a.replace("l2\n", "X\n").replace("l25\n", "Y\n");
        let d = unified_diff(&a, &b, "a", "b");
        assert_eq!(d.matches("@@ -").count(), 2);
        round_trip(&a, &b);
    }

    #[test]
    fn deleted_vhdl_comments_are_not_headers() {
        round_trip("-- a\n+ b\nx\n", "x\n");
        round_trip("x\n", "-- a\n++ b\nx\n");
    }

    #[test]
    fn context_mismatch_is_reported() {
        let d = unified_diff("a\nb\nc\n", "a\nB\nc\n", "o", "n");
        assert!(matches!(apply_patch("a\nz\nc\n", &d), Err(PatchError::Mismatch { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn replay_reconstructs_target(
            a in proptest::collection::vec("[a-d]{0,2}", 0..25),
            b in proptest::collection::vec("[a-d]{0,2}", 0..25),
            a_term: bool,
            b_term: bool,
        ) {
            let mut a = a.join("\n");
            let mut b = b.join("\n");
            if a_term && !a.is_empty() { a.push('\n'); }
            if b_term && !b.is_empty() { b.push('\n'); }
            let d = unified_diff(&a, &b, "a", "b");
            prop_assert_eq!(apply_patch(&a, &d), Ok(b));
        }
    }
}
