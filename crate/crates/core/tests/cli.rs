use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_hdl-mend");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn hdl_mend(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn hdl-mend")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn build_index(dir: &Path) -> PathBuf {
    let out = dir.join("index.json");
    let o = hdl_mend(&["build-index", s(&fixtures().join("e2e/corpus")), "--out", s(&out), "--embedder", "hashing:64"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

fn write_config(dir: &Path, chat: &str, index: Option<&Path>, extra: Value) -> PathBuf {
    let mut cfg = json!({
        "chat_backend": {"kind": "scripted", "model_id": s(&fixtures().join(chat))},
        "embedding_backend": {"kind": "hashing", "dimensions": 64},
        "compiler": {"kind": "mock"},
    });
    if let Some(i) = index {
        cfg["index_path"] = json!(s(i));
    }
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn run_dir_from(o: &Output) -> PathBuf {
    let stdout = String::from_utf8_lossy(&o.stdout);
    let line = stdout
        .lines()
        .find_map(|l| l.strip_prefix("run directory: "))
        .unwrap_or_else(|| panic!("no run directory in:\n{stdout}"));
    PathBuf::from(line)
}

#[test]
fn build_index_counts_docs_and_rejects_empty_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_index(tmp.path());
    let v: Value = serde_json::from_str(&fs::read_to_string(&index).unwrap()).unwrap();
    assert_eq!(v["docs"].as_array().unwrap().len(), 3);

    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = hdl_mend(&["build-index", s(&empty), "--out", s(&tmp.path().join("x.json")), "--embedder", "hashing"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn run_writes_one_record_per_candidate_and_run() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_index(tmp.path());
    let cfg = write_config(
        tmp.path(),
        "dataset_chat.json",
        Some(&index),
        json!({"runs_per_function": 1, "candidates_per_function": 2, "policy": "mcp"}),
    );
    let o = hdl_mend(&["run", s(&fixtures().join("dataset")), "--config", s(&cfg), "--out", s(&tmp.path().join("runs"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = run_dir_from(&o);
    let records = fs::read_to_string(dir.join("outcomes.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 4);
    for name in ["config.json", "audit.jsonl", "report.txt", "report.json"] {
        assert!(dir.join(name).is_file(), "missing {name}");
    }
    assert_eq!(fs::read_dir(dir.join("transcripts")).unwrap().count(), 4);
}

#[test]
fn retrieval_policy_without_index_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "dataset_chat.json", None, json!({"policy": "naive_rag", "candidates_per_function": 2}));
    let o = hdl_mend(&["run", s(&fixtures().join("dataset")), "--config", s(&cfg), "--out", s(&tmp.path().join("runs"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("index"), "{}", stderr(&o));
    assert!(!tmp.path().join("runs").exists() || fs::read_dir(tmp.path().join("runs")).unwrap().count() == 0);
}

#[test]
fn repair_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_index(tmp.path());
    let cfg = write_config(tmp.path(), "e2e/chat.json", Some(&index), json!({}));
    let file = tmp.path().join("blink.vhd");
    fs::copy(fixtures().join("e2e/blink.vhd"), &file).unwrap();

    let o = hdl_mend(&["repair", s(&file), "--config", s(&cfg), "--policy", "mcp", "--log-dir", s(&tmp.path().join("log"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let repaired = fs::read_to_string(tmp.path().join("blink.repaired.vhd")).unwrap();
    assert!(repaired.contains("use ieee.std_logic_1164.all;"));
    assert!(tmp.path().join("log/audit.jsonl").is_file());

    let o = hdl_mend(&["repair", s(&file), "--config", s(&cfg), "--policy", "expert"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!fs::read_to_string(tmp.path().join("blink.repaired.vhd")).unwrap().contains("library"));

    let o = hdl_mend(&["repair", s(&tmp.path().join("missing.vhd")), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_keeps_column_order_and_flags_corruption() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_index(tmp.path());
    let mut dirs = Vec::new();
    for policy in ["mcp", "expert", "naive_rag"] {
        let sub = tmp.path().join(policy);
        fs::create_dir(&sub).unwrap();
        let cfg = write_config(
            &sub,
            "dataset_chat.json",
            Some(&index),
            json!({"runs_per_function": 1, "candidates_per_function": 2}),
        );
        let o = hdl_mend(&[
            "run",
            s(&fixtures().join("dataset")),
            "--config",
            s(&cfg),
            "--policy",
            policy,
            "--out",
            s(&sub.join("runs")),
        ]);
        assert_eq!(o.status.code(), Some(0), "{policy}: {}", stderr(&o));
        dirs.push(run_dir_from(&o));
    }
    let args: Vec<&str> = dirs.iter().map(|d| s(d)).collect();

    let o = hdl_mend(&[&["report"][..], &args].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    let header = table.lines().nth(1).unwrap();
    assert!(header.starts_with("Metric  MCP  Non-MCP  Non-MCP+RAG"), "{table}");
    assert_eq!(table.lines().count(), 6);

    let o = hdl_mend(&[&["report", "--format", "json"][..], &args].concat());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let policies: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["policy"].as_str().unwrap()).collect();
    assert_eq!(policies, ["mcp", "expert", "naive_rag"]);

    let store = dirs[1].join("outcomes.jsonl");
    let good = fs::read_to_string(&store).unwrap();
    let first = good.lines().next().unwrap().len() + 1;
    fs::write(&store, format!("{}#corrupt\n", &good[..first])).unwrap();
    let o = hdl_mend(&[&["report"][..], &args].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("byte {first}")), "{}", stderr(&o));
}

#[test]
fn serve_tools_answers_over_stdio() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_index(tmp.path());
    let cfg = write_config(tmp.path(), "e2e/chat.json", Some(&index), json!({}));
    let mut child = Command::new(BIN)
        .args(["serve-tools", "--config", s(&cfg), "--audit", s(&tmp.path().join("audit.jsonl"))])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let broken = fs::read_to_string(fixtures().join("e2e/blink.vhd")).unwrap();
    let requests = [
        json!({"jsonrpc": "2.0", "id": 1, "method": "tools/list"}),
        json!({"jsonrpc": "2.0", "id": 2, "method": "SyntaxCheck", "params": {"code": broken}}),
        json!({"jsonrpc": "2.0", "id": 3, "method": "RetrieveExamples", "params": {"query": "library ieee std_logic"}}),
        json!({"jsonrpc": "2.0", "id": 4, "method": "shutdown"}),
    ];
    {
        let mut stdin = child.stdin.take().unwrap();
        for r in &requests {
            writeln!(stdin, "{r}").unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let replies: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(replies.len(), 3);
    assert_eq!(replies[1]["result"]["data"]["report"]["pass"], false);
    let hits = replies[2]["result"]["data"]["hits"].as_array().unwrap();
    assert!(!hits.is_empty() && hits.len() <= 3, "{}", replies[2]);
}
