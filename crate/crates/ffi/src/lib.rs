//! C ABI over the `graphpde` core.
//!
//! Every fallible function returns a [`GpStatus`]. On failure a message is
//! stored per thread and can be fetched with [`gp_last_error_message`].
//! Handles are opaque and must be released with their `_free` function.
//! Panics never cross the boundary; they surface as `GP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use graphpde::io::{self, LoadedGraph};
use graphpde::solvers::{self, EikonalSign, InitialGuess, Scheme, SolveStatus, SolverConfig};
use graphpde::{Distance, Error, Operator, OperatorSpec, SolveReport, VertexField};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidGraph = 4,
    InvalidOperator = 5,
    InvalidArgument = 6,
    Solver = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpScheme {
    FixedPoint = 0,
    GaussSeidel = 1,
    Eikonal = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpSolveStatus {
    Converged = 0,
    MaxIter = 1,
    Stagnated = 2,
    InfeasibleDetected = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpEikonalSign {
    Plus = 0,
    Minus = 1,
}

/// Plain-data solver settings. Start from [`gp_solver_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GpSolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub stagnation_window: usize,
    pub scheme: GpScheme,
}

/// A graph and its boundary data.
pub struct GpGraph {
    inner: LoadedGraph,
}

/// An operator bound to a particular graph.
pub struct GpOperator {
    op: Operator,
    vertices: usize,
}

pub struct GpReport {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GpStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::UnknownName(_) => GpStatus::Parse,
        Error::InvalidGraph(_) => GpStatus::InvalidGraph,
        Error::InvalidSpec(_) | Error::NotHomogeneous(_) => GpStatus::InvalidOperator,
        Error::DegenerateMap | Error::ScalarSolve(_) | Error::NotConnected(_) | Error::NonpositiveSource { .. } => {
            GpStatus::Solver
        }
        Error::Io(_) => GpStatus::Io,
        _ => GpStatus::InvalidArgument,
    }
}

struct Fail(GpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GpStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, recording any error and trapping panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GpStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside graphpde");
            GpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GpStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, expected: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != expected {
        return Err(Fail(GpStatus::InvalidArgument, format!("`{what}` has {len} values, expected {expected}")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, expected: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < expected {
        return Err(Fail(GpStatus::InvalidArgument, format!("`{what}` holds {len} values, need {expected}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, expected))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn check_bound(op: &GpOperator, graph: &GpGraph) -> Result<(), Fail> {
    if op.vertices != graph.inner.graph.len() {
        return Err(Fail(
            GpStatus::InvalidArgument,
            format!("operator was bound to a graph with {} vertices, got {}", op.vertices, graph.inner.graph.len()),
        ));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gp_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next `gp_` call on the same thread.
#[no_mangle]
pub extern "C" fn gp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from a `gp_` function that hands out owned strings.
#[no_mangle]
pub unsafe extern "C" fn gp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses graph JSON (vertices with optional boundary data `g`, weighted edges).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_from_json(json: *const c_char, out: *mut *mut GpGraph) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let inner = io::graph_from_json(str_arg(json, "json")?)?;
        out.write(Box::into_raw(Box::new(GpGraph { inner })));
        Ok(())
    })
}

/// Serializes the graph with its boundary data. Free with [`gp_string_free`].
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_to_json(graph: *const GpGraph) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let gr = ref_arg(graph, "graph")?;
        let text = io::graph_to_json(&gr.inner.graph, Some(&gr.inner.g));
        result = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    });
    result
}

/// # Safety
/// `graph` must come from [`gp_graph_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_free(graph: *mut GpGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_vertex_count(graph: *const GpGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.graph.len())
}

/// Index of the vertex named `id`. Indices follow the JSON vertex order.
///
/// # Safety
/// Pointers must be valid; `id` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_vertex_index(graph: *const GpGraph, id: *const c_char, out: *mut usize) -> GpStatus {
    guard(|| {
        let gr = ref_arg(graph, "graph")?;
        let x = gr.inner.graph.index_of(str_arg(id, "id")?)?;
        put(out, x, "out")
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_is_boundary(graph: *const GpGraph, vertex: usize, out: *mut bool) -> GpStatus {
    guard(|| {
        let gr = ref_arg(graph, "graph")?;
        if vertex >= gr.inner.graph.len() {
            return Err(Fail(GpStatus::InvalidArgument, format!("vertex index {vertex} out of range")));
        }
        put(out, gr.inner.graph.is_boundary(vertex), "out")
    })
}

/// Copies the boundary data (0 at interior vertices unless given) into `out`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_boundary_data(graph: *const GpGraph, out: *mut f64, len: usize) -> GpStatus {
    guard(|| {
        let gr = ref_arg(graph, "graph")?;
        let dst = out_slice(out, len, gr.inner.graph.len(), "out")?;
        dst.copy_from_slice(gr.inner.g.values());
        Ok(())
    })
}

/// Shortest path length from `from` to `to` with edge lengths `1/w`.
/// When `to` is unreachable, `*reachable` is false and `*out` is +inf.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_path_distance(
    graph: *const GpGraph,
    from: usize,
    to: usize,
    out: *mut f64,
    reachable: *mut bool,
) -> GpStatus {
    guard(|| {
        let gr = ref_arg(graph, "graph")?;
        let n = gr.inner.graph.len();
        if from >= n || to >= n {
            return Err(Fail(GpStatus::InvalidArgument, format!("vertex index out of range (n = {n})")));
        }
        if out.is_null() || reachable.is_null() {
            return Err(null("out"));
        }
        match gr.inner.graph.path_distance(from, to) {
            Distance::Finite(d) => {
                out.write(d);
                reachable.write(true);
            }
            Distance::Infinite => {
                out.write(f64::INFINITY);
                reachable.write(false);
            }
        }
        Ok(())
    })
}

/// Parses an operator spec and binds it to `graph`.
///
/// # Safety
/// Pointers must be valid; `json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gp_operator_from_json(
    graph: *const GpGraph,
    json: *const c_char,
    out: *mut *mut GpOperator,
) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let gr = ref_arg(graph, "graph")?;
        let spec = OperatorSpec::from_json(str_arg(json, "json")?)?;
        let op = spec.bind(&gr.inner.graph)?;
        out.write(Box::into_raw(Box::new(GpOperator { op, vertices: gr.inner.graph.len() })));
        Ok(())
    })
}

/// # Safety
/// `op` must come from [`gp_operator_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_operator_free(op: *mut GpOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Evaluates the operator at every interior vertex and `u - g` on the boundary.
///
/// # Safety
/// `u` and `out` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_evaluate(
    op: *const GpOperator,
    graph: *const GpGraph,
    u: *const f64,
    out: *mut f64,
    len: usize,
) -> GpStatus {
    guard(|| {
        let op = ref_arg(op, "op")?;
        let gr = ref_arg(graph, "graph")?;
        check_bound(op, gr)?;
        let n = gr.inner.graph.len();
        let u = VertexField::new(&gr.inner.graph, slice_arg(u, len, n, "u")?.to_vec())?;
        let value = op.op.evaluate(&gr.inner.graph, &u, &gr.inner.g)?;
        out_slice(out, len, n, "out")?.copy_from_slice(value.values());
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn gp_solver_config_default() -> GpSolverConfig {
    let d = SolverConfig::default();
    GpSolverConfig {
        tolerance: d.tolerance,
        max_iterations: d.max_iterations,
        damping: d.damping,
        stagnation_window: d.stagnation_window,
        scheme: GpScheme::GaussSeidel,
    }
}

fn config(cfg: &GpSolverConfig, initial: InitialGuess) -> SolverConfig {
    SolverConfig {
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        damping: cfg.damping,
        stagnation_window: cfg.stagnation_window,
        scheme: match cfg.scheme {
            GpScheme::FixedPoint => Scheme::FixedPointT,
            GpScheme::GaussSeidel => Scheme::GaussSeidelLocal,
            GpScheme::Eikonal => Scheme::EikonalLabelSetting,
        },
        initial,
    }
}

/// Solves the Dirichlet problem `op(u) = 0` inside, `u = g` on the boundary.
/// `cfg` may be null for defaults. `initial` may be null for the midrange
/// start; otherwise it holds `len` doubles. A run that ends without
/// converging still returns `GP_STATUS_OK`; inspect the report status.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_solve(
    op: *const GpOperator,
    graph: *const GpGraph,
    cfg: *const GpSolverConfig,
    initial: *const f64,
    len: usize,
    out: *mut *mut GpReport,
) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let op = ref_arg(op, "op")?;
        let gr = ref_arg(graph, "graph")?;
        check_bound(op, gr)?;
        let start = if initial.is_null() {
            InitialGuess::Midrange
        } else {
            let values = slice_arg(initial, len, gr.inner.graph.len(), "initial")?.to_vec();
            InitialGuess::Field(VertexField::new(&gr.inner.graph, values)?)
        };
        let base = cfg.as_ref().copied().unwrap_or_else(|| gp_solver_config_default());
        let cfg = config(&base, start);
        cfg.validate().map_err(|e| Fail(GpStatus::InvalidArgument, e.to_string()))?;
        let report = solvers::solve(&op.op, &gr.inner.graph, &gr.inner.g, &cfg)?;
        out.write(Box::into_raw(Box::new(GpReport { report })));
        Ok(())
    })
}

/// Exact eikonal solve with positive source `h` (`len` doubles, boundary
/// entries ignored) and the graph's boundary data.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_solve_eikonal(
    graph: *const GpGraph,
    h: *const f64,
    len: usize,
    sign: GpEikonalSign,
    out: *mut *mut GpReport,
) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let gr = ref_arg(graph, "graph")?;
        let graph = &gr.inner.graph;
        let mut h = VertexField::new(graph, slice_arg(h, len, graph.len(), "h")?.to_vec())?;
        for b in graph.boundary() {
            h[b] = 1.0;
        }
        let sign = match sign {
            GpEikonalSign::Plus => EikonalSign::Plus,
            GpEikonalSign::Minus => EikonalSign::Minus,
        };
        let cfg = config(&gp_solver_config_default(), InitialGuess::Midrange);
        let report = solvers::solve_eikonal(graph, &gr.inner.g, &h, sign, &cfg)?;
        out.write(Box::into_raw(Box::new(GpReport { report })));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_report_status(report: *const GpReport, out: *mut GpSolveStatus) -> GpStatus {
    guard(|| {
        let r = ref_arg(report, "report")?;
        let s = match r.report.status {
            SolveStatus::Converged => GpSolveStatus::Converged,
            SolveStatus::MaxIter => GpSolveStatus::MaxIter,
            SolveStatus::Stagnated => GpSolveStatus::Stagnated,
            SolveStatus::InfeasibleDetected => GpSolveStatus::InfeasibleDetected,
        };
        put(out, s, "out")
    })
}

/// Iteration count, or 0 for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_report_iterations(report: *const GpReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.iterations)
}

/// Interior residual sup-norm of the returned solution, NaN for null.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_report_residual(report: *const GpReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.residual_inf_norm)
}

/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_report_solution(report: *const GpReport, out: *mut f64, len: usize) -> GpStatus {
    guard(|| {
        let r = ref_arg(report, "report")?;
        let values = r.report.solution.values();
        out_slice(out, len, values.len(), "out")?.copy_from_slice(values);
        Ok(())
    })
}

/// # Safety
/// `report` must come from a solve call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_report_free(report: *mut GpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(status_of(&Error::UnknownName("x".into())), GpStatus::Parse);
        assert_eq!(status_of(&Error::InvalidSpec("x".into())), GpStatus::InvalidOperator);
        assert_eq!(status_of(&Error::DegenerateMap), GpStatus::Solver);
        assert_eq!(status_of(&Error::NoInteriorVertex), GpStatus::InvalidArgument);
    }

    #[test]
    fn panics_are_trapped() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, GpStatus::Panic);
        assert!(!gp_last_error_message().is_null());
        assert_eq!(guard(|| Ok(())), GpStatus::Ok);
        assert!(gp_last_error_message().is_null());
    }

    #[test]
    fn error_text_survives_nul() {
        set_error("a\0b");
        let msg = unsafe { CStr::from_ptr(gp_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
