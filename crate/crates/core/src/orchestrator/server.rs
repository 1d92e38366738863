//! Line-delimited JSON-RPC server exposing the tool menu on stdin/stdout.
//!
//! Request: `{"jsonrpc":"2.0","id":1,"method":"SyntaxCheck","params":{"code":"..."}}`.
//! `tools/list` returns the menu; `shutdown` (or EOF) ends the session.

use std::io::{self, BufRead, Write};

use serde_json::{json, Value};

use super::tools::{dispatch_tool, ToolCall, ToolContext, ToolError, ToolOutput};
use super::Services;
use crate::model::RunConfig;

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
pub const TOOL_FAILURE: i64 = -32000;

fn error(id: Value, code: i64, message: String) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message}})
}

fn success(id: Value, result: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "result": result})
}

/// Answers one request line. `None` means the session should end.
pub fn handle_line(line: &str, seq: u64, services: &Services, cfg: &RunConfig) -> Option<Value> {
    let req: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return Some(error(Value::Null, PARSE_ERROR, e.to_string())),
    };
    let id = req.get("id").cloned().unwrap_or(Value::Null);
    let Some(method) = req.get("method").and_then(Value::as_str) else {
        return Some(error(id, INVALID_REQUEST, "missing `method`".into()));
    };
    match method {
        "shutdown" => return None,
        "tools/list" => {
            let tools: Vec<Value> = services
                .registry
                .specs()
                .iter()
                .filter(|s| s.enabled)
                .map(|s| json!({"name": s.name.as_str(), "description": s.description}))
                .collect();
            return Some(success(id, json!({ "tools": tools })));
        }
        _ => {}
    }
    let params = req.get("params").cloned().unwrap_or_else(|| json!({}));
    let call_id = match &id {
        Value::String(s) => s.clone(),
        Value::Null => format!("server-{seq}"),
        other => other.to_string(),
    };
    let call = ToolCall {
        id: call_id,
        tool: method.to_string(),
        arguments: params,
    };
    let ctx = ToolContext {
        cfg,
        case_id: "server".into(),
        run_index: 0,
        candidate_index: 0,
        iteration: None,
        seed: cfg.seed.wrapping_add(seq),
        workdir: services.scratch_root.join("server"),
        sink: None,
    };
    Some(match dispatch_tool(&call, services, &ctx) {
        Ok(r) => {
            let data = match r.output {
                ToolOutput::Report(report) => json!({ "report": report }),
                ToolOutput::Exemplars { hits, block } => json!({ "hits": hits, "block": block }),
                ToolOutput::Code(code) => json!({ "code": code }),
            };
            success(
                id,
                json!({"payload": r.payload, "token_count": r.token_count, "duration_ms": r.duration_ms, "data": data}),
            )
        }
        Err(e) => {
            let code = match e {
                ToolError::UnknownTool(_) | ToolError::DisabledTool(_) => METHOD_NOT_FOUND,
                ToolError::InvalidArguments { .. } => INVALID_PARAMS,
                _ => TOOL_FAILURE,
            };
            error(id, code, e.to_string())
        }
    })
}

/// Serves requests until EOF or `shutdown`.
pub fn serve(input: impl BufRead, mut output: impl Write, services: &Services, cfg: &RunConfig) -> io::Result<()> {
    for (seq, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some(resp) = handle_line(&line, seq as u64, services, cfg) else {
            break;
        };
        writeln!(output, "{resp}")?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::MockChecker;
    use crate::llm::ScriptedBackend;
    use std::sync::Arc;

    #[test]
    fn session_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let services = Services::new(Arc::new(MockChecker::new()), Arc::new(ScriptedBackend::from_records(vec![])))
            .with_scratch_root(tmp.path());
        let cfg = RunConfig::default();
        let input = concat!(
            r#"{"jsonrpc":"2.0","id":1,"method":"tools/list"}"#,
            "\n",
            r#"{"jsonrpc":"2.0","id":2,"method":"SyntaxCheck","params":{"code":"entity e is\nend entity;\n"}}"#,
            "\n",
            r#"{"jsonrpc":"2.0","id":3,"method":"ManualLookup","params":{}}"#,
            "\nnot json\n",
            r#"{"id":4,"method":"shutdown"}"#,
            "\n",
            r#"{"id":5,"method":"tools/list"}"#,
            "\n"
        );
        let mut out = Vec::new();
        serve(input.as_bytes(), &mut out, &services, &cfg).unwrap();
        let lines: Vec<Value> = String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0]["result"]["tools"].as_array().unwrap().len(), 3);
        assert_eq!(lines[1]["id"], 2);
        assert_eq!(lines[1]["result"]["data"]["report"]["pass"], true);
        assert_eq!(lines[2]["error"]["code"], METHOD_NOT_FOUND);
        assert_eq!(lines[3]["error"]["code"], PARSE_ERROR);
        assert_eq!(services.audit.entries().len(), 2);
    }
}
