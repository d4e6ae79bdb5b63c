//! C ABI over the synclust core: opaque handles, integer status codes, and a
//! per-thread last-error message.
//!
//! Conventions:
//! - Constructors return a handle through an out-pointer and a [`SynclustStatus`];
//!   every successful construction must be released with the matching `_free`.
//! - Any non-`SYNCLUST_STATUS_OK` return leaves a UTF-8 message readable via
//!   [`synclust_last_error`] (valid on the same thread until the next failure).
//! - All entry points catch panics and report them as `SYNCLUST_STATUS_PANIC`
//!   rather than unwinding across the boundary.
//!
//! The generated header lives at `include/synclust.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use synclust::dynamics::{MethodKind, SimulationConfig, SimulationEnsemble};
use synclust::error::{Error, ErrorCategory};
use synclust::graph::{Graph, Partition};
use synclust::similarity::{self, Dendrogram, EdgeSimilarityTable};
use synclust::{evaluation, dynamics, InteractionOperator, OperatorKind};

/// Status of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynclustStatus {
    Ok = 0,
    /// Invalid configuration or arguments.
    Usage = 1,
    /// Unreadable or inconsistent input data.
    Data = 2,
    /// Numerical failure (divergence, non-convergence, singularity).
    Numerical = 3,
    /// A required pointer argument was null.
    NullArg = 4,
    /// A string argument was not valid UTF-8.
    Utf8 = 5,
    /// A panic was caught at the boundary.
    Panic = 6,
    /// A caller-supplied buffer was too small.
    BufferTooSmall = 7,
}

/// Operator kinds, mirroring the core enum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynclustOperator {
    Laplacian = 0,
    RwNorm = 1,
    SymNorm = 2,
    Replicator = 3,
    ScaledAdj = 4,
    Modularity = 5,
}

impl From<SynclustOperator> for OperatorKind {
    fn from(k: SynclustOperator) -> Self {
        match k {
            SynclustOperator::Laplacian => OperatorKind::Laplacian,
            SynclustOperator::RwNorm => OperatorKind::RandomWalkNorm,
            SynclustOperator::SymNorm => OperatorKind::SymNorm,
            SynclustOperator::Replicator => OperatorKind::Replicator,
            SynclustOperator::ScaledAdj => OperatorKind::ScaledAdjacency,
            SynclustOperator::Modularity => OperatorKind::Modularity,
        }
    }
}

/// Integration method selection.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynclustMethod {
    Auto = 0,
    Closed = 1,
    Euler = 2,
}

impl From<SynclustMethod> for MethodKind {
    fn from(m: SynclustMethod) -> Self {
        match m {
            SynclustMethod::Auto => MethodKind::Auto,
            SynclustMethod::Closed => MethodKind::ClosedForm,
            SynclustMethod::Euler => MethodKind::Euler,
        }
    }
}

/// Opaque graph handle.
pub struct SynclustGraph {
    inner: Arc<Graph>,
}

/// Opaque ensemble of simulated phase trajectories.
pub struct SynclustEnsemble {
    inner: SimulationEnsemble,
    graph: Arc<Graph>,
}

/// Opaque per-edge similarity table.
pub struct SynclustSimilarity {
    inner: EdgeSimilarityTable,
}

/// Opaque average-link dendrogram (plus the labels needed for Newick).
pub struct SynclustDendrogram {
    inner: Dendrogram,
    graph: Arc<Graph>,
}

/// Opaque node partition.
pub struct SynclustPartition {
    inner: Partition,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(e: &Error) -> SynclustStatus {
    set_error(&e.to_string());
    match e.category() {
        ErrorCategory::Usage => SynclustStatus::Usage,
        ErrorCategory::Data => SynclustStatus::Data,
        ErrorCategory::Numerical => SynclustStatus::Numerical,
    }
}

fn fail_usage(msg: &str) -> SynclustStatus {
    set_error(msg);
    SynclustStatus::Usage
}

fn null_arg(what: &str) -> SynclustStatus {
    set_error(&format!("null argument: {what}"));
    SynclustStatus::NullArg
}

/// Run `f` with panics converted to a status.
fn guarded(f: impl FnOnce() -> SynclustStatus) -> SynclustStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            SynclustStatus::Panic
        }
    }
}

/// # Safety
/// The returned pointer is owned by thread-local storage: it stays valid on
/// the calling thread until the next failing synclust call, and must not be
/// freed.
#[no_mangle]
pub unsafe extern "C" fn synclust_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn synclust_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must be a string previously returned by a synclust function documented
/// to transfer ownership (e.g. [`synclust_dendrogram_newick`]); null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn synclust_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, SynclustStatus> {
    if p.is_null() {
        return Err(null_arg("string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        SynclustStatus::Utf8
    })
}

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

/// Load an edge-list file (whitespace-separated pairs, `#` comments).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer; on
/// `Ok` the caller owns the handle and must release it with
/// [`synclust_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn synclust_graph_load(
    path: *const c_char,
    out: *mut *mut SynclustGraph,
) -> SynclustStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let path = match cstr(path) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match Graph::load_edge_list(Path::new(path)) {
            Ok((g, _report)) => {
                *out = Box::into_raw(Box::new(SynclustGraph { inner: Arc::new(g) }));
                SynclustStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Build a graph on nodes `0..n` from `n_edges` index pairs stored
/// `[u0, v0, u1, v1, ...]`; duplicates and self-loops are dropped.
///
/// # Safety
/// `edges` must point to `2 * n_edges` readable `uint32_t`s (may be null when
/// `n_edges` is 0) and `out` must be valid; on `Ok` the caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn synclust_graph_from_edges(
    n: usize,
    edges: *const u32,
    n_edges: usize,
    out: *mut *mut SynclustGraph,
) -> SynclustStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if edges.is_null() && n_edges > 0 {
            return null_arg("edges");
        }
        let pairs: Vec<(u32, u32)> = (0..n_edges)
            .map(|i| (*edges.add(2 * i), *edges.add(2 * i + 1)))
            .collect();
        match Graph::from_index_edges(n, &pairs) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(SynclustGraph { inner: Arc::new(g) }));
                SynclustStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `g` must be a live graph handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn synclust_graph_node_count(g: *const SynclustGraph) -> usize {
    if g.is_null() {
        return 0;
    }
    (*g).inner.node_count()
}

/// # Safety
/// `g` must be a live graph handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn synclust_graph_edge_count(g: *const SynclustGraph) -> usize {
    if g.is_null() {
        return 0;
    }
    (*g).inner.edge_count()
}

/// Copy the external name of dense node `index` into `buf` (NUL-terminated).
///
/// # Safety
/// `g` must be live; `buf` must point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn synclust_graph_node_name(
    g: *const SynclustGraph,
    index: u32,
    buf: *mut c_char,
    cap: usize,
) -> SynclustStatus {
    guarded(|| {
        if g.is_null() {
            return null_arg("graph");
        }
        if buf.is_null() {
            return null_arg("buf");
        }
        let graph = &(*g).inner;
        if index as usize >= graph.node_count() {
            return fail_usage(&format!(
                "node index {index} out of range 0..{}",
                graph.node_count()
            ));
        }
        let name = graph.labels().name(index).as_bytes();
        if name.len() + 1 > cap {
            set_error(&format!("buffer of {cap} bytes < name of {}", name.len() + 1));
            return SynclustStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(name.as_ptr() as *const c_char, buf, name.len());
        *buf.add(name.len()) = 0;
        SynclustStatus::Ok
    })
}

/// # Safety
/// `g` must come from a synclust constructor and not be used afterwards;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn synclust_graph_free(g: *mut SynclustGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// Simulate `runs` trajectories of the phase dynamics under `op`.
///
/// `alpha`: pass NaN for the per-component default (lambda_max). `euler_step`:
/// pass 0 or NaN for the stability default. `times` must start at 0 and
/// ascend strictly.
///
/// # Safety
/// `g` must be live, `times` must point to `n_times` readable doubles, and
/// `out` must be valid; on `Ok` the caller owns the ensemble handle.
#[no_mangle]
pub unsafe extern "C" fn synclust_simulate(
    g: *const SynclustGraph,
    op: SynclustOperator,
    alpha: f64,
    c: f64,
    runs: usize,
    seed: u64,
    times: *const f64,
    n_times: usize,
    method: SynclustMethod,
    euler_step: f64,
    out: *mut *mut SynclustEnsemble,
) -> SynclustStatus {
    guarded(|| {
        if g.is_null() {
            return null_arg("graph");
        }
        if times.is_null() {
            return null_arg("times");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let graph = (*g).inner.clone();
        let kind: OperatorKind = op.into();
        let alpha = if alpha.is_nan() { None } else { Some(alpha) };
        let operator = match InteractionOperator::build(graph.clone(), kind, alpha) {
            Ok(o) => o,
            Err(e) => return fail(&e),
        };
        let grid = std::slice::from_raw_parts(times, n_times).to_vec();
        let cfg = SimulationConfig {
            c,
            omega: None,
            runs,
            time_grid: grid,
            seed,
            method: method.into(),
            euler_step: (euler_step.is_finite() && euler_step > 0.0).then_some(euler_step),
        };
        match dynamics::simulate(&operator, &cfg) {
            Ok(ens) => {
                *out = Box::into_raw(Box::new(SynclustEnsemble { inner: ens, graph }));
                SynclustStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `e` must be a live ensemble handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn synclust_ensemble_run_count(e: *const SynclustEnsemble) -> usize {
    if e.is_null() {
        return 0;
    }
    (*e).inner.run_count()
}

/// # Safety
/// `e` must be a live ensemble handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn synclust_ensemble_node_count(e: *const SynclustEnsemble) -> usize {
    if e.is_null() {
        return 0;
    }
    (*e).inner.node_count()
}

/// # Safety
/// `e` must be a live ensemble handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn synclust_ensemble_time_count(e: *const SynclustEnsemble) -> usize {
    if e.is_null() {
        return 0;
    }
    (*e).inner.time_grid().len()
}

/// Copy the phases of one run at one grid index into `buf` (node count
/// doubles, dense index order).
///
/// # Safety
/// `e` must be live; `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn synclust_ensemble_theta(
    e: *const SynclustEnsemble,
    run: usize,
    time_index: usize,
    buf: *mut f64,
    cap: usize,
) -> SynclustStatus {
    guarded(|| {
        if e.is_null() {
            return null_arg("ensemble");
        }
        if buf.is_null() {
            return null_arg("buf");
        }
        let ens = &(*e).inner;
        if run >= ens.run_count() || time_index >= ens.time_grid().len() {
            return fail_usage(&format!(
                "run {run} / time index {time_index} out of range ({} runs, {} times)",
                ens.run_count(),
                ens.time_grid().len()
            ));
        }
        let theta = ens.theta(run, time_index);
        if cap < theta.len() {
            set_error(&format!("buffer of {cap} doubles < {}", theta.len()));
            return SynclustStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(theta.as_ptr(), buf, theta.len());
        SynclustStatus::Ok
    })
}

/// # Safety
/// `e` must come from [`synclust_simulate`] and not be used afterwards;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn synclust_ensemble_free(e: *mut SynclustEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

// ---------------------------------------------------------------------------
// Similarity and clustering
// ---------------------------------------------------------------------------

/// Ensemble-averaged edge similarities at grid time `t`.
///
/// # Safety
/// `e` must be live and `out` valid; on `Ok` the caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn synclust_edge_similarity(
    e: *const SynclustEnsemble,
    t: f64,
    out: *mut *mut SynclustSimilarity,
) -> SynclustStatus {
    guarded(|| {
        if e.is_null() {
            return null_arg("ensemble");
        }
        if out.is_null() {
            return null_arg("out");
        }
        match similarity::edge_similarity(&(*e).inner, t, &(*e).graph) {
            Ok(table) => {
                *out = Box::into_raw(Box::new(SynclustSimilarity { inner: table }));
                SynclustStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// # Safety
/// `s` must be a live similarity handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn synclust_similarity_edge_count(s: *const SynclustSimilarity) -> usize {
    if s.is_null() {
        return 0;
    }
    (*s).inner.values().len()
}

/// Copy per-edge similarities (graph edge order) into `buf`.
///
/// # Safety
/// `s` must be live; `buf` must point to `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn synclust_similarity_values(
    s: *const SynclustSimilarity,
    buf: *mut f64,
    cap: usize,
) -> SynclustStatus {
    guarded(|| {
        if s.is_null() {
            return null_arg("similarity");
        }
        if buf.is_null() {
            return null_arg("buf");
        }
        let values = (*s).inner.values();
        if cap < values.len() {
            set_error(&format!("buffer of {cap} doubles < {}", values.len()));
            return SynclustStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        SynclustStatus::Ok
    })
}

/// # Safety
/// `s` must come from [`synclust_edge_similarity`] and not be used afterwards;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn synclust_similarity_free(s: *mut SynclustSimilarity) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Communities = connected components of edges with similarity >= 1 - mu.
///
/// # Safety
/// `g` and `s` must be live handles over the same graph and `out` valid; on
/// `Ok` the caller owns the partition handle.
#[no_mangle]
pub unsafe extern "C" fn synclust_threshold_communities(
    g: *const SynclustGraph,
    s: *const SynclustSimilarity,
    mu: f64,
    out: *mut *mut SynclustPartition,
) -> SynclustStatus {
    guarded(|| {
        if g.is_null() {
            return null_arg("graph");
        }
        if s.is_null() {
            return null_arg("similarity");
        }
        if out.is_null() {
            return null_arg("out");
        }
        match similarity::threshold_communities(&(*g).inner, &(*s).inner, mu) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SynclustPartition { inner: p }));
                SynclustStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Average-link dendrogram over pairwise similarities at grid time `t`.
///
/// # Safety
/// `e` must be live and `out` valid; on `Ok` the caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn synclust_hierarchical_cluster(
    e: *const SynclustEnsemble,
    t: f64,
    out: *mut *mut SynclustDendrogram,
) -> SynclustStatus {
    guarded(|| {
        if e.is_null() {
            return null_arg("ensemble");
        }
        if out.is_null() {
            return null_arg("out");
        }
        match similarity::hierarchical_cluster(&(*e).inner, t, &(*e).graph) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(SynclustDendrogram {
                    inner: d,
                    graph: (*e).graph.clone(),
                }));
                SynclustStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Undo merges until exactly `k` clusters remain.
///
/// # Safety
/// `d` must be live and `out` valid; on `Ok` the caller owns the partition.
#[no_mangle]
pub unsafe extern "C" fn synclust_dendrogram_cut(
    d: *const SynclustDendrogram,
    k: usize,
    out: *mut *mut SynclustPartition,
) -> SynclustStatus {
    guarded(|| {
        if d.is_null() {
            return null_arg("dendrogram");
        }
        if out.is_null() {
            return null_arg("out");
        }
        match (*d).inner.cut(k) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SynclustPartition { inner: p }));
                SynclustStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Newick rendering with merge similarities as internal-node annotations.
/// Returns a heap string to release with [`synclust_string_free`], or null
/// on failure.
///
/// # Safety
/// `d` must be a live dendrogram handle.
#[no_mangle]
pub unsafe extern "C" fn synclust_dendrogram_newick(d: *const SynclustDendrogram) -> *mut c_char {
    let result = catch_unwind(AssertUnwindSafe(|| {
        if d.is_null() {
            set_error("null argument: dendrogram");
            return std::ptr::null_mut();
        }
        let text = (*d).inner.to_newick((*d).graph.labels());
        match CString::new(text) {
            Ok(s) => s.into_raw(),
            Err(_) => {
                set_error("newick text contained NUL");
                std::ptr::null_mut()
            }
        }
    }));
    result.unwrap_or_else(|_| {
        set_error("internal panic");
        std::ptr::null_mut()
    })
}

/// # Safety
/// `d` must come from [`synclust_hierarchical_cluster`] and not be used
/// afterwards; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn synclust_dendrogram_free(d: *mut SynclustDendrogram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

// ---------------------------------------------------------------------------
// Partitions and metrics
// ---------------------------------------------------------------------------

/// # Safety
/// `p` must be a live partition handle (null returns 0).
#[no_mangle]
pub unsafe extern "C" fn synclust_partition_community_count(
    p: *const SynclustPartition,
) -> usize {
    if p.is_null() {
        return 0;
    }
    (*p).inner.community_count()
}

/// Copy the dense community assignment (one id per node) into `buf`.
///
/// # Safety
/// `p` must be live; `buf` must point to `cap` writable `uint32_t`s.
#[no_mangle]
pub unsafe extern "C" fn synclust_partition_assignment(
    p: *const SynclustPartition,
    buf: *mut u32,
    cap: usize,
) -> SynclustStatus {
    guarded(|| {
        if p.is_null() {
            return null_arg("partition");
        }
        if buf.is_null() {
            return null_arg("buf");
        }
        let assignment = (*p).inner.assignment();
        if cap < assignment.len() {
            set_error(&format!("buffer of {cap} u32 < {}", assignment.len()));
            return SynclustStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(assignment.as_ptr(), buf, assignment.len());
        SynclustStatus::Ok
    })
}

/// Build a partition from a dense assignment (`labels[i]` = community of
/// node `i`; ids are compacted).
///
/// # Safety
/// `labels` must point to `n` readable `uint32_t`s and `out` must be valid;
/// on `Ok` the caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn synclust_partition_from_assignment(
    labels: *const u32,
    n: usize,
    out: *mut *mut SynclustPartition,
) -> SynclustStatus {
    guarded(|| {
        if labels.is_null() {
            return null_arg("labels");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let v = std::slice::from_raw_parts(labels, n).to_vec();
        *out = Box::into_raw(Box::new(SynclustPartition {
            inner: Partition::from_assignment(v),
        }));
        SynclustStatus::Ok
    })
}

/// # Safety
/// `p` must come from a synclust constructor and not be used afterwards;
/// null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn synclust_partition_free(p: *mut SynclustPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Normalized mutual information of two partitions over the same node set,
/// in [0, 1].
///
/// # Safety
/// `a` and `b` must be live partition handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn synclust_nmi(
    a: *const SynclustPartition,
    b: *const SynclustPartition,
    out: *mut f64,
) -> SynclustStatus {
    guarded(|| {
        if a.is_null() || b.is_null() {
            return null_arg("partition");
        }
        if out.is_null() {
            return null_arg("out");
        }
        match evaluation::nmi(&(*a).inner, &(*b).inner) {
            Ok(v) => {
                *out = v;
                SynclustStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
