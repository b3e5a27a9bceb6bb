//! C ABI over `wedcs`.
//!
//! Graphs and subgraphs are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`WedcsStatus`]; the message of the last failure on the calling thread is
//! available from [`wedcs_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wedcs::edcs::{self, EdcsError, EdcsParams, Rational};
use wedcs::graph::{Capacities, EdgeId, GraphError, MultiGraph, Subgraph};
use wedcs::io::{parse_graph, read_graph, ParseError};
use wedcs::matching::{exact_on, MatchingError};
use wedcs::streaming::{self, make_stream, Fallback, Variant};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WedcsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    /// Input violates a documented precondition (e.g. too many parallel edges).
    Precondition = 4,
    /// The exact oracle ran out of its node budget.
    OracleBudget = 5,
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// A multigraph together with its vertex capacities.
pub struct WedcsGraph {
    graph: MultiGraph,
    caps: Capacities,
}

/// An edge subset of a graph, with its weighted degrees.
pub struct WedcsSubgraph {
    edges: Vec<u32>,
    weighted_degree: Vec<u64>,
    weight: u64,
}

/// Sparsifier parameters; epsilon is `epsilon_num / epsilon_den`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WedcsParams {
    pub w_cap: u32,
    pub epsilon_num: i64,
    pub epsilon_den: i64,
    pub beta: u64,
    pub beta_minus: u64,
}

/// Summary of one stream run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct WedcsStreamResult {
    pub result_weight: u64,
    pub h_size: usize,
    pub underfull_collected: usize,
    pub phase1_edges_consumed: usize,
    pub peak_stored_edges: usize,
    pub replacements: u64,
    /// 0 none, 1 small output, 2 alpha zero.
    pub fallback: u32,
    /// 0 exact, 1 greedy.
    pub extraction: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(WedcsStatus, String);

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        let status = match e {
            ParseError::Io(_) => WedcsStatus::Io,
            _ => WedcsStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let status = match e {
            GraphError::NotSimple(..) | GraphError::MultiplicityExceeded { .. } => WedcsStatus::Precondition,
            _ => WedcsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<EdcsError> for Failure {
    fn from(e: EdcsError) -> Self {
        match e {
            EdcsError::Graph(g) => g.into(),
            EdcsError::WeightAboveCap { .. } => Failure(WedcsStatus::Precondition, e.to_string()),
            _ => Failure(WedcsStatus::InvalidArgument, e.to_string()),
        }
    }
}

impl From<MatchingError> for Failure {
    fn from(e: MatchingError) -> Self {
        let status = match e {
            MatchingError::BudgetExceeded { .. } => WedcsStatus::OracleBudget,
            MatchingError::Graph(g) => return g.into(),
            _ => WedcsStatus::Precondition,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(WedcsStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, records any failure or panic, and returns its status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WedcsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            WedcsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            WedcsStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(WedcsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn params_of(p: &WedcsParams) -> Result<EdcsParams, Failure> {
    if p.epsilon_den == 0 {
        return Err(Failure(WedcsStatus::InvalidArgument, "epsilon denominator is zero".into()));
    }
    Ok(EdcsParams::new(p.w_cap, Rational::new(p.epsilon_num, p.epsilon_den), p.beta, p.beta_minus)?)
}

fn subgraph_handle(graph: &MultiGraph, ids: &[EdgeId]) -> Box<WedcsSubgraph> {
    let mut weighted_degree = vec![0u64; graph.n()];
    let mut weight = 0;
    for &id in ids {
        let e = graph.edge(id);
        weighted_degree[e.u] += u64::from(e.w);
        weighted_degree[e.v] += u64::from(e.w);
        weight += u64::from(e.w);
    }
    Box::new(WedcsSubgraph { edges: ids.iter().map(|id| id.0).collect(), weighted_degree, weight })
}

fn edge_ids(graph: &MultiGraph, ids: &[u32]) -> Result<Vec<EdgeId>, Failure> {
    ids.iter()
        .map(|&i| {
            let id = EdgeId(i);
            graph
                .get_edge(id)
                .map(|_| id)
                .ok_or_else(|| Failure(WedcsStatus::InvalidArgument, format!("edge id {i} out of range")))
        })
        .collect()
}

unsafe fn put<T>(out: *mut *mut T, value: Box<T>) {
    *out = Box::into_raw(value);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wedcs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn wedcs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a graph in the text format (`g n m W`, `b v b_v`, `e u v w`).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wedcs_graph_parse(text: *const c_char, out: *mut *mut WedcsGraph) -> WedcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let file = parse_graph(c_str(text, "text")?)?;
        put(out, Box::new(WedcsGraph { graph: file.graph, caps: file.caps }));
        Ok(())
    })
}

/// Reads a graph file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wedcs_graph_load(path: *const c_char, out: *mut *mut WedcsGraph) -> WedcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let file = read_graph(c_str(path, "path")?)?;
        put(out, Box::new(WedcsGraph { graph: file.graph, caps: file.caps }));
        Ok(())
    })
}

/// Builds a graph from parallel arrays of endpoints and weights. `caps` may
/// be null for unit capacities, otherwise it holds `n` entries.
///
/// # Safety
/// Each non-null array must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn wedcs_graph_from_edges(
    n: usize,
    w_cap: u32,
    us: *const u32,
    vs: *const u32,
    ws: *const u32,
    m: usize,
    caps: *const u32,
    out: *mut *mut WedcsGraph,
) -> WedcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (us, vs, ws) = (slice(us, m, "us")?, slice(vs, m, "vs")?, slice(ws, m, "ws")?);
        let graph = MultiGraph::from_edges(
            n,
            w_cap,
            (0..m).map(|i| (us[i] as usize, vs[i] as usize, ws[i])),
        )?;
        let caps = if caps.is_null() {
            Capacities::ones(n)
        } else {
            Capacities::from_vec(slice(caps, n, "caps")?.to_vec())?
        };
        put(out, Box::new(WedcsGraph { graph, caps }));
        Ok(())
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wedcs_graph_free(graph: *mut WedcsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of vertices, 0 for null.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wedcs_graph_vertex_count(graph: *const WedcsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.n())
}

/// Number of edges, 0 for null.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wedcs_graph_edge_count(graph: *const WedcsGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.m())
}

/// Builds a sparsifier by local search from the empty subgraph.
///
/// # Safety
/// `graph` and `params` must be live, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wedcs_build_edcs(
    graph: *const WedcsGraph,
    params: *const WedcsParams,
    out: *mut *mut WedcsSubgraph,
) -> WedcsStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        let params = params_of(borrow(params, "params")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let built = edcs::build_wb_edcs(&g.graph, &g.caps, &params)?;
        put(out, subgraph_handle(&g.graph, &built.subgraph.edge_ids()));
        Ok(())
    })
}

/// Number of edges in a subgraph, 0 for null.
///
/// # Safety
/// `sub` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wedcs_subgraph_edge_count(sub: *const WedcsSubgraph) -> usize {
    sub.as_ref().map_or(0, |s| s.edges.len())
}

/// Total weight of a subgraph, 0 for null.
///
/// # Safety
/// `sub` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wedcs_subgraph_weight(sub: *const WedcsSubgraph) -> u64 {
    sub.as_ref().map_or(0, |s| s.weight)
}

/// Copies up to `cap` edge ids, ascending, into `buf`; `written` receives the
/// number copied. Fails with `InvalidArgument` if `cap` is too small.
///
/// # Safety
/// `buf` must have room for `cap` ids; `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wedcs_subgraph_edges(
    sub: *const WedcsSubgraph,
    buf: *mut u32,
    cap: usize,
    written: *mut usize,
) -> WedcsStatus {
    guard(|| {
        let s = borrow(sub, "sub")?;
        if written.is_null() {
            return Err(null("written"));
        }
        if cap < s.edges.len() {
            *written = 0;
            return Err(Failure(
                WedcsStatus::InvalidArgument,
                format!("buffer holds {cap} ids, {} needed", s.edges.len()),
            ));
        }
        if !s.edges.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(s.edges.as_ptr(), buf, s.edges.len());
        }
        *written = s.edges.len();
        Ok(())
    })
}

/// Weighted degree of vertex `v` inside the subgraph.
///
/// # Safety
/// `sub` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn wedcs_subgraph_weighted_degree(sub: *const WedcsSubgraph, v: usize, out: *mut u64) -> WedcsStatus {
    guard(|| {
        let s = borrow(sub, "sub")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = *s
            .weighted_degree
            .get(v)
            .ok_or_else(|| Failure(WedcsStatus::InvalidArgument, format!("vertex {v} out of range")))?;
        Ok(())
    })
}

/// Releases a subgraph. Null is ignored.
///
/// # Safety
/// `sub` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wedcs_subgraph_free(sub: *mut WedcsSubgraph) {
    if !sub.is_null() {
        drop(Box::from_raw(sub));
    }
}

/// Counts the edges of `ids` breaking the upper bound and the edges outside
/// breaking the lower bound.
///
/// # Safety
/// `ids` must hold `len` entries; the other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wedcs_validate(
    graph: *const WedcsGraph,
    ids: *const u32,
    len: usize,
    params: *const WedcsParams,
    upper_violations: *mut usize,
    lower_violations: *mut usize,
) -> WedcsStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        let params = params_of(borrow(params, "params")?)?;
        if upper_violations.is_null() || lower_violations.is_null() {
            return Err(null("violation counters"));
        }
        let ids = edge_ids(&g.graph, slice(ids, len, "ids")?)?;
        let h = Subgraph::from_edges(&g.graph, ids)?;
        let report = edcs::validate(&g.graph, &g.caps, &h, &params);
        *upper_violations = report.upper_violations.len();
        *lower_violations = report.lower_violations.len();
        Ok(())
    })
}

/// Exact maximum-weight b-matching. Fails with `OracleBudget` when the
/// search exceeds `budget` nodes.
///
/// # Safety
/// `graph` must be live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn wedcs_max_weight_b_matching(
    graph: *const WedcsGraph,
    budget: u64,
    out: *mut *mut WedcsSubgraph,
) -> WedcsStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = exact_on(&g.graph, &g.graph.edge_ids(), &g.caps, budget)?;
        put(out, subgraph_handle(&g.graph, &m.members));
        Ok(())
    })
}

/// One seeded stream run. `variant` is 1 or 3; `controller` non-zero runs
/// behind the small-output fallback.
///
/// # Safety
/// `graph`, `params` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wedcs_stream_run(
    graph: *const WedcsGraph,
    params: *const WedcsParams,
    seed: u64,
    variant: u32,
    controller: i32,
    budget: u64,
    out: *mut WedcsStreamResult,
) -> WedcsStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        let params = params_of(borrow(params, "params")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let variant = match variant {
            1 => Variant::Bounded,
            3 => Variant::Relevant,
            other => return Err(Failure(WedcsStatus::InvalidArgument, format!("unknown variant {other}"))),
        };
        let stream = make_stream(&g.graph, seed);
        let run = if controller != 0 {
            streaming::fallback_controller(stream, &g.caps, &params, variant, budget)?
        } else if variant == Variant::Bounded {
            streaming::run_algorithm1(stream, &g.caps, &params, budget)?
        } else {
            streaming::run_algorithm3(stream, &g.caps, &params, budget)?
        };
        let s = run.stats;
        *out = WedcsStreamResult {
            result_weight: s.result_weight,
            h_size: s.h_size,
            underfull_collected: s.underfull_collected,
            phase1_edges_consumed: s.phase1_edges_consumed,
            peak_stored_edges: s.peak_stored_edges,
            replacements: s.replacements,
            fallback: match s.fallback_used {
                Fallback::None => 0,
                Fallback::SmallOutput => 1,
                Fallback::AlphaZero => 2,
            },
            extraction: match s.extraction {
                streaming::Extraction::Exact => 0,
                streaming::Extraction::Greedy => 1,
            },
        };
        Ok(())
    })
}
