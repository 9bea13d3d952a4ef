//! C ABI over the benchgate core: call-graph loading, suite optimization and
//! the change statistics.
//!
//! Every function returns a [`BgStatus`]. On failure the message is kept per
//! thread and can be read with [`bg_last_error_message`]. Objects cross the
//! boundary as opaque handles and must be released with their `_free`
//! function. Strings handed out by the library are released with
//! [`bg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use benchgate::callgraph::{load_callgraph, CallGraph, GraphFormat};
use benchgate::detection::{dynamic_threshold, DetectorConfig};
use benchgate::optimizer::{optimize, reference_impact, OptimizedSuite, OptimizerConfig};
use benchgate::stats::{bootstrap_ci_flat, median_change, BootstrapConfig, Scheme};
use benchgate::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    InvalidArgument = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgGraphFormat {
    /// Edge CSV for a `.csv` extension, JSON otherwise.
    Auto = 0,
    Json = 1,
    EdgeCsv = 2,
}

/// Bootstrap result for one base/variation pair. All values are percent.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgChangeInterval {
    pub median_change_pct: f64,
    pub ci_low_pct: f64,
    pub ci_high_pct: f64,
    /// Width of the interval.
    pub instability_pct: f64,
    /// True when the interval excludes zero.
    pub excludes_zero: bool,
}

/// Parameters of the dynamic detection threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgThresholdParams {
    pub threshold_factor: f64,
    pub min_threshold_pct: f64,
    /// Number of trailing instabilities averaged.
    pub instability_window: usize,
}

/// A validated call graph.
pub struct BgCallGraph {
    graph: CallGraph,
}

/// An optimized benchmark suite.
pub struct BgSuite {
    suite: OptimizedSuite,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(BgStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::Io { .. } => BgStatus::Io,
            Error::Parse { .. } => BgStatus::Parse,
            Error::Validation(_) => BgStatus::Validation,
            Error::InvalidArgument(_) => BgStatus::InvalidArgument,
        };
        Failure(status, err.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BgStatus::NullPointer, format!("`{what}` is null"))
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BgStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            BgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BgStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn to_c_string(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).unwrap_or_default()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a
/// successful call.
///
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn bg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a call graph from `path`.
///
/// # Safety
///
/// `path` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` owns a graph that must be released with
/// [`bg_callgraph_free`].
#[no_mangle]
pub unsafe extern "C" fn bg_callgraph_load(
    path: *const c_char,
    format: BgGraphFormat,
    out: *mut *mut BgCallGraph,
) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = Path::new(str_arg(path, "path")?);
        let format = match format {
            BgGraphFormat::Auto => GraphFormat::from_path(path),
            BgGraphFormat::Json => GraphFormat::Json,
            BgGraphFormat::EdgeCsv => GraphFormat::EdgeCsv,
        };
        let graph = load_callgraph(path, format)?;
        *out = Box::into_raw(Box::new(BgCallGraph { graph }));
        Ok(())
    })
}

/// # Safety
///
/// `graph` must come from [`bg_callgraph_load`] and not be freed already.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bg_callgraph_free(graph: *mut BgCallGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
///
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_callgraph_node_count(graph: *const BgCallGraph, out: *mut usize) -> BgStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(graph, "graph")?.graph.node_count();
        Ok(())
    })
}

/// Writes whether `graph` is an application graph.
///
/// # Safety
///
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_callgraph_is_application(graph: *const BgCallGraph, out: *mut bool) -> BgStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(graph, "graph")?.graph.is_application();
        Ok(())
    })
}

/// Summed application duration, in seconds, of the nodes `micro` covers.
///
/// # Safety
///
/// Both graphs must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_reference_impact(
    app: *const BgCallGraph,
    micro: *const BgCallGraph,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = reference_impact(&handle(app, "app")?.graph, &handle(micro, "micro")?.graph)?;
        Ok(())
    })
}

/// Greedy suite selection over `n_micros` microbenchmark graphs.
/// `top_k` of 0 means no limit.
///
/// # Safety
///
/// `app` must be a live handle, `micros` must point to `n_micros` live
/// handles and `out` must be a valid pointer. On success `*out` owns a suite
/// that must be released with [`bg_suite_free`].
#[no_mangle]
pub unsafe extern "C" fn bg_optimize(
    app: *const BgCallGraph,
    micros: *const *const BgCallGraph,
    n_micros: usize,
    min_gain: usize,
    top_k: usize,
    out: *mut *mut BgSuite,
) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let app = &handle(app, "app")?.graph;
        let mut graphs = Vec::with_capacity(n_micros);
        for &m in slice_arg(micros, n_micros, "micros")? {
            graphs.push(handle(m, "micros[i]")?.graph.clone());
        }
        let cfg = OptimizerConfig { min_gain, top_k: (top_k > 0).then_some(top_k) };
        let suite = optimize(app, &graphs, &cfg)?;
        let names = suite.steps.iter().map(|s| to_c_string(&s.benchmark)).collect();
        *out = Box::into_raw(Box::new(BgSuite { suite, names }));
        Ok(())
    })
}

/// # Safety
///
/// `suite` must come from [`bg_optimize`] and not be freed already. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn bg_suite_free(suite: *mut BgSuite) {
    if !suite.is_null() {
        drop(Box::from_raw(suite));
    }
}

/// Number of selected benchmarks, or 0 for a null handle.
///
/// # Safety
///
/// `suite` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bg_suite_len(suite: *const BgSuite) -> usize {
    suite.as_ref().map_or(0, |s| s.names.len())
}

/// Id of the `index`-th selected benchmark, or null when out of range.
///
/// # Safety
///
/// `suite` must be null or a live handle. The string is owned by the suite.
#[no_mangle]
pub unsafe extern "C" fn bg_suite_benchmark(suite: *const BgSuite, index: usize) -> *const c_char {
    suite
        .as_ref()
        .and_then(|s| s.names.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Newly covered application nodes of the `index`-th selection step.
///
/// # Safety
///
/// `suite` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_suite_gain(suite: *const BgSuite, index: usize, out: *mut usize) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = handle(suite, "suite")?;
        let step = s.suite.steps.get(index).ok_or_else(|| {
            Failure(
                BgStatus::InvalidArgument,
                format!("index {index} out of range for a suite of {}", s.names.len()),
            )
        })?;
        *out = step.gain_nodes;
        Ok(())
    })
}

/// Fraction of application nodes covered by the selection.
///
/// # Safety
///
/// `suite` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_suite_practical_relevance(suite: *const BgSuite, out: *mut f64) -> BgStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(suite, "suite")?.suite.practical_relevance;
        Ok(())
    })
}

/// Serializes the suite as JSON.
///
/// # Safety
///
/// `suite` must be a live handle and `out` a valid pointer. The string
/// written to `*out` must be released with [`bg_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bg_suite_to_json(suite: *const BgSuite, out: *mut *mut c_char) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = to_c_string(&handle(suite, "suite")?.suite.to_json_string()).into_raw();
        Ok(())
    })
}

/// # Safety
///
/// `s` must be a string returned by this library and not freed already.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Percent change of the variation median relative to the base median.
///
/// # Safety
///
/// `base` and `variation` must point to `n_base` and `n_variation` doubles
/// and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_median_change(
    base: *const f64,
    n_base: usize,
    variation: *const f64,
    n_variation: usize,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = median_change(slice_arg(base, n_base, "base")?, slice_arg(variation, n_variation, "variation")?)?;
        Ok(())
    })
}

/// Bootstrap interval of the median change over flat latency lists.
///
/// # Safety
///
/// `base` and `variation` must point to `n_base` and `n_variation` doubles
/// and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bg_bootstrap_flat(
    base: *const f64,
    n_base: usize,
    variation: *const f64,
    n_variation: usize,
    samples: usize,
    alpha: f64,
    seed: u64,
    out: *mut BgChangeInterval,
) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = BootstrapConfig { samples, alpha, rng_seed: seed, scheme: Scheme::Flat };
        cfg.validate()?;
        let base = slice_arg(base, n_base, "base")?;
        let variation = slice_arg(variation, n_variation, "variation")?;
        let r = bootstrap_ci_flat("ffi", "ffi", base, variation, &cfg)?;
        *out = BgChangeInterval {
            median_change_pct: r.median_change_pct,
            ci_low_pct: r.ci_low_pct,
            ci_high_pct: r.ci_high_pct,
            instability_pct: r.instability_pct,
            excludes_zero: r.excludes_zero(),
        };
        Ok(())
    })
}

/// Detection threshold for the next commit given earlier instabilities.
/// With no history `initial_pct` applies, never below the minimum.
///
/// # Safety
///
/// `history` must point to `n_history` doubles and `params` and `out` must
/// be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bg_dynamic_threshold(
    history: *const f64,
    n_history: usize,
    params: *const BgThresholdParams,
    initial_pct: f64,
    out: *mut f64,
) -> BgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = handle(params, "params")?;
        if p.instability_window == 0 {
            return Err(Failure(BgStatus::InvalidArgument, "instability_window must be at least 1".into()));
        }
        let cfg = DetectorConfig {
            threshold_factor: p.threshold_factor,
            min_threshold_pct: p.min_threshold_pct,
            instability_window: p.instability_window,
            ..DetectorConfig::default()
        };
        *out = dynamic_threshold(slice_arg(history, n_history, "history")?, &cfg, initial_pct);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, BgStatus::Panic);
        let msg = unsafe { CStr::from_ptr(bg_last_error_message()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
        assert_eq!(guard(|| Ok(())), BgStatus::Ok);
        assert!(bg_last_error_message().is_null());
    }

    #[test]
    fn interior_nuls_do_not_lose_messages() {
        set_last_error("a\0b".into());
        let msg = unsafe { CStr::from_ptr(bg_last_error_message()) }.to_str().unwrap();
        assert_eq!(msg, "a b");
    }
}
