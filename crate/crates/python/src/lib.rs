//! Python bindings: syntax checks, index building, single-file repair and reports.
//!
//! Structured results cross the boundary as JSON and are decoded with the
//! interpreter's own `json` module, so callers get plain dicts and lists.

use std::path::{Path, PathBuf};

use hdl_mend_core::cli::{cmd_report, CliError};
use hdl_mend_core::compiler::{CompilerProfile, GhdlChecker, MockChecker, SyntaxChecker};
use hdl_mend_core::metrics::{self, ReportFormat};
use hdl_mend_core::model::{parse_config, Candidate, PolicyKind, Provenance};
use hdl_mend_core::orchestrator::repair_trial;
use hdl_mend_core::retrieval::{build_index as build, EmbeddingClient, HashingEmbedder};
use hdl_mend_core::Services;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn from_json<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn runtime(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn cli_err(e: CliError) -> PyErr {
    PyValueError::new_err(e.message)
}

fn scratch() -> PyResult<tempfile::TempDir> {
    tempfile::tempdir().map_err(runtime)
}

/// Checks one VHDL unit. `compiler` is "mock" (in-process) or "ghdl".
#[pyfunction]
#[pyo3(signature = (code, compiler = "mock"))]
fn check_syntax<'py>(py: Python<'py>, code: &str, compiler: &str) -> PyResult<Bound<'py, PyAny>> {
    let checker: Box<dyn SyntaxChecker> = match compiler {
        "mock" => Box::new(MockChecker::new()),
        "ghdl" => Box::new(GhdlChecker::new(CompilerProfile::default())),
        other => return Err(PyValueError::new_err(format!("unknown compiler `{other}`"))),
    };
    let dir = scratch()?;
    let out = py.detach(|| checker.check(code, dir.path())).map_err(runtime)?;
    from_json(py, &out.report)
}

/// Embeds every `.vhd` file under `corpus_dir` with the hashing embedder and
/// writes the index to `out`. Returns the number of documents.
#[pyfunction]
#[pyo3(signature = (corpus_dir, out, dims = HashingEmbedder::DEFAULT_DIMS))]
fn build_index(py: Python<'_>, corpus_dir: PathBuf, out: PathBuf, dims: usize) -> PyResult<usize> {
    py.detach(|| {
        let client = EmbeddingClient::new(Box::new(HashingEmbedder { dims }));
        let (index, _) = build(&corpus_dir, &client).map_err(|e| PyValueError::new_err(e.to_string()))?;
        index.save(&out).map_err(runtime)?;
        Ok(index.docs.len())
    })
}

/// Repairs one unit under the policy in `config` (or `policy` when given).
#[pyfunction]
#[pyo3(signature = (code, config, policy = None, case_id = "input"))]
fn repair<'py>(
    py: Python<'py>,
    code: &str,
    config: PathBuf,
    policy: Option<&str>,
    case_id: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = parse_config(&config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some(p) = policy {
        cfg.policy = p.parse::<PolicyKind>().map_err(PyValueError::new_err)?;
    }
    let dir = scratch()?;
    let candidate = Candidate {
        case_id: case_id.into(),
        index: 0,
        vhdl_text: code.into(),
        provenance: Provenance::Dataset,
    };
    let outcome = py.detach(|| {
        let services = Services::from_config(&cfg).map_err(runtime)?.with_scratch_root(dir.path());
        repair_trial(&candidate, 0, &cfg, &services).map(|(o, _)| o).map_err(runtime)
    })?;
    from_json(py, &outcome)
}

/// Renders the comparison table (or JSON) for finished run directories.
#[pyfunction]
#[pyo3(signature = (run_dirs, format = "table"))]
fn report(run_dirs: Vec<PathBuf>, format: &str) -> PyResult<String> {
    let format = match format {
        "table" => ReportFormat::Table,
        "json" => ReportFormat::Json,
        other => return Err(PyValueError::new_err(format!("unknown format `{other}`"))),
    };
    cmd_report(&run_dirs, format).map_err(cli_err)
}

#[pyfunction]
fn format_percent(rate: f64) -> String {
    metrics::format_percent(rate)
}

#[pyfunction]
fn load_config<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(Path::new(&path)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    from_json(py, &cfg)
}

#[pymodule]
fn hdl_mend(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(check_syntax, m)?)?;
    m.add_function(wrap_pyfunction!(build_index, m)?)?;
    m.add_function(wrap_pyfunction!(repair, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(format_percent, m)?)?;
    m.add_function(wrap_pyfunction!(load_config, m)?)?;
    Ok(())
}
