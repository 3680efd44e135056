//! C interface to the repair engine.
//!
//! Every fallible function returns a [`PgrStatus`] and writes its result
//! through an out pointer. Handles are opaque and must be released with the
//! matching `_free` function. After a failure, [`pgr_last_error`] describes
//! what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chrono::DateTime;
use pgrepair::constraint::{parse_constraints, Constraint};
use pgrepair::error::PipelineError;
use pgrepair::graph::PropertyGraph;
use pgrepair::pipeline::{run_pipeline, PipelineConfig, RepairReport, SolverKind};
use pgrepair::solvers::SolverStatus;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidGraph = 3,
    InvalidConstraints = 4,
    InvalidOptions = 5,
    LimitExceeded = 6,
    SolverFailed = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgrSolver {
    Ilp = 0,
    Greedy = 1,
    LpGreedy = 2,
    IlpExplicit = 3,
}

/// Pipeline options. Obtain defaults from [`pgr_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PgrOptions {
    pub label_mode: bool,
    /// 0 disables neighbourhood errors.
    pub neighbourhood_k: usize,
    /// 0 disables sampled errors.
    pub sample_k: usize,
    pub solver: PgrSolver,
    pub approximate: bool,
    pub seed: u64,
    /// Value of NOW() as seconds since the Unix epoch.
    pub now_unix_seconds: i64,
    /// Numeric property holding deletion costs, or NULL.
    pub custom_weight_key: *const c_char,
    /// 0 keeps the library default.
    pub max_matches: usize,
    /// 0 keeps the library default.
    pub max_nodes: usize,
}

/// A property graph.
pub struct PgrGraph(PropertyGraph);

/// A parsed list of constraints.
pub struct PgrConstraints(Vec<Constraint>);

/// The outcome of a repair run.
pub struct PgrReport {
    report: RepairReport,
    json: CString,
    graph_json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(PgrStatus, String);

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Config(_) | PipelineError::Weight(_) => PgrStatus::InvalidOptions,
            PipelineError::Graph(_) => PgrStatus::InvalidGraph,
            PipelineError::Constraint(_) => PgrStatus::InvalidConstraints,
            PipelineError::Limit(_) => PgrStatus::LimitExceeded,
            PipelineError::Solver(_) | PipelineError::NoProgress(_) => PgrStatus::SolverFailed,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PgrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PgrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PgrStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(PgrStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure(PgrStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(PgrStatus::NullPointer, format!("{what} is NULL")))
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure(PgrStatus::NullPointer, "output pointer is NULL".into()))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> CString {
    CString::new(s).expect("JSON contains no NUL bytes")
}

/// Message for the most recent failure on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pgr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn pgr_status_str(status: PgrStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PgrStatus::Ok => c"ok",
        PgrStatus::NullPointer => c"null pointer",
        PgrStatus::InvalidUtf8 => c"invalid UTF-8",
        PgrStatus::InvalidGraph => c"invalid graph",
        PgrStatus::InvalidConstraints => c"invalid constraints",
        PgrStatus::InvalidOptions => c"invalid options",
        PgrStatus::LimitExceeded => c"limit exceeded",
        PgrStatus::SolverFailed => c"solver failed",
        PgrStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

#[no_mangle]
pub extern "C" fn pgr_options_default() -> PgrOptions {
    let config = PipelineConfig::new(DateTime::UNIX_EPOCH);
    PgrOptions {
        label_mode: false,
        neighbourhood_k: 0,
        sample_k: 0,
        solver: PgrSolver::Ilp,
        approximate: false,
        seed: 0,
        now_unix_seconds: 0,
        custom_weight_key: ptr::null(),
        max_matches: config.match_limits.max_matches,
        max_nodes: config.solver_limits.max_nodes,
    }
}

/// Parses a graph from its JSON encoding.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pgr_graph_from_json(json: *const c_char, out: *mut *mut PgrGraph) -> PgrStatus {
    guard(|| {
        out_ptr(out)?;
        let graph = PropertyGraph::from_json_str(text(json, "json")?)
            .map_err(|e| Failure(PgrStatus::InvalidGraph, e.to_string()))?;
        *out = Box::into_raw(Box::new(PgrGraph(graph)));
        Ok(())
    })
}

/// Serialises a graph to JSON. Free the result with [`pgr_string_free`].
///
/// # Safety
/// `graph` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pgr_graph_to_json(graph: *const PgrGraph, out: *mut *mut c_char) -> PgrStatus {
    guard(|| {
        out_ptr(out)?;
        let graph = deref(graph, "graph")?;
        *out = c_string(graph.0.to_json_string()).into_raw();
        Ok(())
    })
}

/// # Safety
/// `graph` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgr_graph_free(graph: *mut PgrGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Parses constraint text.
///
/// # Safety
/// `source` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pgr_constraints_parse(source: *const c_char, out: *mut *mut PgrConstraints) -> PgrStatus {
    guard(|| {
        out_ptr(out)?;
        let constraints = parse_constraints(text(source, "source")?)
            .map_err(|e| Failure(PgrStatus::InvalidConstraints, e.to_string()))?;
        *out = Box::into_raw(Box::new(PgrConstraints(constraints)));
        Ok(())
    })
}

/// Number of constraints in the list, or 0 for NULL.
///
/// # Safety
/// `constraints` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgr_constraints_len(constraints: *const PgrConstraints) -> usize {
    constraints.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `constraints` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgr_constraints_free(constraints: *mut PgrConstraints) {
    if !constraints.is_null() {
        drop(Box::from_raw(constraints));
    }
}

unsafe fn config(options: &PgrOptions) -> Result<PipelineConfig, Failure> {
    let now = DateTime::from_timestamp(options.now_unix_seconds, 0)
        .ok_or_else(|| Failure(PgrStatus::InvalidOptions, "now_unix_seconds out of range".into()))?;
    let mut config = PipelineConfig::new(now);
    config.label_mode = options.label_mode;
    config.neighbourhood_k = (options.neighbourhood_k > 0).then_some(options.neighbourhood_k);
    config.sample_k = (options.sample_k > 0).then_some(options.sample_k);
    config.solver = match options.solver {
        PgrSolver::Ilp => SolverKind::Ilp,
        PgrSolver::Greedy => SolverKind::Greedy,
        PgrSolver::LpGreedy => SolverKind::LpGreedy,
        PgrSolver::IlpExplicit => SolverKind::IlpExplicit,
    };
    config.approximate = options.approximate;
    config.seed = options.seed;
    if !options.custom_weight_key.is_null() {
        config.custom_weight_key = Some(text(options.custom_weight_key, "custom_weight_key")?.to_owned());
    }
    if options.max_matches > 0 {
        config.match_limits.max_matches = options.max_matches;
    }
    if options.max_nodes > 0 {
        config.solver_limits.max_nodes = options.max_nodes;
    }
    Ok(config)
}

/// Runs detection and repair. `options` may be NULL for defaults.
///
/// # Safety
/// Handles must be NULL or live; `options` must be NULL or point to a valid
/// struct; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pgr_repair(
    graph: *const PgrGraph,
    constraints: *const PgrConstraints,
    options: *const PgrOptions,
    out: *mut *mut PgrReport,
) -> PgrStatus {
    guard(|| {
        out_ptr(out)?;
        let graph = deref(graph, "graph")?;
        let constraints = deref(constraints, "constraints")?;
        let options = options.as_ref().copied().unwrap_or_else(|| pgr_options_default());
        let (repaired, report) = run_pipeline(&graph.0, &constraints.0, &config(&options)?)?;
        *out = Box::into_raw(Box::new(PgrReport {
            json: c_string(report.to_json()),
            graph_json: c_string(repaired.to_json_string()),
            report,
        }));
        Ok(())
    })
}

/// The report as JSON. Owned by the report.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgr_report_json(report: *const PgrReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// The repaired graph as JSON. Owned by the report.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgr_report_graph_json(report: *const PgrReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.graph_json.as_ptr())
}

/// Total weight of the deletions.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgr_report_total_weight(report: *const PgrReport) -> f64 {
    report.as_ref().map_or(0.0, |r| r.report.total_weight)
}

/// True when the repair satisfies every constraint, is not approximate and
/// was not found to be non-maximal.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgr_report_is_exact(report: *const PgrReport) -> bool {
    report.as_ref().is_some_and(|r| {
        let r = &r.report;
        r.verification.satisfied
            && r.solver_status != SolverStatus::Approximate
            && r.verification.single_object_maximal != Some(false)
    })
}

/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgr_report_free(report: *mut PgrReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by [`pgr_graph_to_json`].
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
