//! C interface to the `ppclust` library.
//!
//! Objects are opaque handles created by `*_new`/`*_parse`/`ppclust_sample`
//! style constructors and released with the matching `*_free`. Every fallible
//! call returns a [`PpclustStatus`]; on failure a message is available from
//! [`ppclust_last_error`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ppclust::complexes::{betti_numbers, cech_complex};
use ppclust::dists::{check_cx, CountDistribution, CxVerdict};
use ppclust::geometry::{Metric, PointPattern, Window};
use ppclust::percolation::{crossing_probability, gilbert_graph, Graph};
use ppclust::procgen::{sample, GeneratorSpec};
use ppclust::stream::RandomStream;
use ppclust::summaries::ripley_k;
use ppclust::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpclustStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Unsupported = 4,
    Numeric = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Outcome of a convex-order check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpclustCxVerdict {
    Holds = 0,
    Fails = 1,
    MeansDiffer = 2,
}

pub struct PpclustWindow(Window);
pub struct PpclustGenerator(GeneratorSpec);
pub struct PpclustPattern(PointPattern);
pub struct PpclustGraph(Graph);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PpclustStatus {
    match e {
        Error::Parse(_) => PpclustStatus::Parse,
        Error::Unsupported(_) => PpclustStatus::Unsupported,
        Error::Overflow(_) | Error::NonIntegrable(_) | Error::NoBracket(_) | Error::TooManyEmpty { .. } => PpclustStatus::Numeric,
        Error::Io(_) => PpclustStatus::Io,
        _ => PpclustStatus::InvalidArgument,
    }
}

struct Fail(PpclustStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PpclustStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PpclustStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PpclustStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PpclustStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PpclustStatus::Parse, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the most recent failure on this thread; never null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ppclust_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ppclust_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Axis-aligned box `[lower, upper)` of dimension `dim`; `periodic` != 0
/// selects the torus metric.
///
/// # Safety
/// `lower` and `upper` must point to `dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_window_new(
    dim: usize,
    lower: *const f64,
    upper: *const f64,
    periodic: c_int,
    out: *mut *mut PpclustWindow,
) -> PpclustStatus {
    guard(|| {
        let lo = slice(lower, dim, "lower")?.to_vec();
        let hi = slice(upper, dim, "upper")?.to_vec();
        let metric = if periodic != 0 { Metric::Periodic } else { Metric::Euclidean };
        let w = Window::new(lo, hi, metric)?;
        put(out, Box::into_raw(Box::new(PpclustWindow(w))), "out")
    })
}

/// # Safety
/// `w` must come from `ppclust_window_new` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ppclust_window_free(w: *mut PpclustWindow) {
    free(w)
}

/// Parses a generator description such as `poisson(intensity=1)`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_generator_parse(spec: *const c_char, out: *mut *mut PpclustGenerator) -> PpclustStatus {
    guard(|| {
        let g: GeneratorSpec = text(spec, "spec")?.parse()?;
        put(out, Box::into_raw(Box::new(PpclustGenerator(g))), "out")
    })
}

/// Expected points per unit volume.
///
/// # Safety
/// `g` must be a live generator handle and `w` a live window handle.
#[no_mangle]
pub unsafe extern "C" fn ppclust_generator_intensity(g: *const PpclustGenerator, w: *const PpclustWindow, out: *mut f64) -> PpclustStatus {
    guard(|| {
        let (g, w) = (borrow(g, "generator")?, borrow(w, "window")?);
        put(out, g.0.window_intensity(&w.0), "out")
    })
}

/// # Safety
/// `g` must come from `ppclust_generator_parse` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ppclust_generator_free(g: *mut PpclustGenerator) {
    free(g)
}

/// Draws one pattern; identical `(generator, window, seed)` give identical patterns.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_sample(
    g: *const PpclustGenerator,
    w: *const PpclustWindow,
    seed: u64,
    out: *mut *mut PpclustPattern,
) -> PpclustStatus {
    guard(|| {
        let (g, w) = (borrow(g, "generator")?, borrow(w, "window")?);
        let p = sample(&g.0, &w.0, &RandomStream::new(seed))?;
        put(out, Box::into_raw(Box::new(PpclustPattern(p))), "out")
    })
}

/// Builds a pattern from `n` points stored row-major in `coords` (`n * dim` doubles).
///
/// # Safety
/// `w` must be live; `coords` must point to `n * dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_pattern_new(
    w: *const PpclustWindow,
    coords: *const f64,
    n: usize,
    out: *mut *mut PpclustPattern,
) -> PpclustStatus {
    guard(|| {
        let w = borrow(w, "window")?;
        let len = n
            .checked_mul(w.0.dim())
            .ok_or_else(|| Fail(PpclustStatus::InvalidArgument, "point count overflows".into()))?;
        let c = slice(coords, len, "coords")?.to_vec();
        let p = PointPattern::from_coords(w.0.clone(), c)?;
        put(out, Box::into_raw(Box::new(PpclustPattern(p))), "out")
    })
}

/// Number of points.
///
/// # Safety
/// `p` must be a live pattern handle.
#[no_mangle]
pub unsafe extern "C" fn ppclust_pattern_len(p: *const PpclustPattern, out: *mut usize) -> PpclustStatus {
    guard(|| put(out, borrow(p, "pattern")?.0.len(), "out"))
}

/// Copies the coordinates (row-major, `len * dim` doubles) into `buf`.
/// `*written` receives the number of doubles needed; when `capacity` is too
/// small nothing is copied and `BufferTooSmall` is returned.
///
/// # Safety
/// `p` must be live; `buf` must have room for `capacity` doubles; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_pattern_coords(
    p: *const PpclustPattern,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> PpclustStatus {
    guard(|| {
        let c = borrow(p, "pattern")?.0.coords();
        put(written, c.len(), "written")?;
        copy_out(c, buf, capacity)
    })
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, capacity: usize) -> Result<(), Fail> {
    if src.len() > capacity {
        return Err(Fail(
            PpclustStatus::BufferTooSmall,
            format!("need room for {} values, got {capacity}", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// # Safety
/// `p` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ppclust_pattern_free(p: *mut PpclustPattern) {
    free(p)
}

/// Gilbert graph: points within distance `2 r` are joined.
///
/// # Safety
/// `p` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_gilbert_graph(p: *const PpclustPattern, r: f64, out: *mut *mut PpclustGraph) -> PpclustStatus {
    guard(|| {
        let g = gilbert_graph(&borrow(p, "pattern")?.0, r)?;
        put(out, Box::into_raw(Box::new(PpclustGraph(g))), "out")
    })
}

/// Vertex and edge counts.
///
/// # Safety
/// `g` must be live; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_graph_size(g: *const PpclustGraph, vertices: *mut usize, edges: *mut usize) -> PpclustStatus {
    guard(|| {
        let g = &borrow(g, "graph")?.0;
        put(vertices, g.n_vertices(), "vertices")?;
        put(edges, g.n_edges(), "edges")
    })
}

/// Copies the sorted edge list as `2 * edges` vertex indices (`i < j` pairs).
///
/// # Safety
/// `g` must be live; `buf` must have room for `capacity` values; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_graph_edges(
    g: *const PpclustGraph,
    buf: *mut u32,
    capacity: usize,
    written: *mut usize,
) -> PpclustStatus {
    guard(|| {
        let flat: Vec<u32> = borrow(g, "graph")?.0.edges().iter().flat_map(|&(i, j)| [i, j]).collect();
        put(written, flat.len(), "written")?;
        copy_out(&flat, buf, capacity)
    })
}

/// # Safety
/// `g` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ppclust_graph_free(g: *mut PpclustGraph) {
    free(g)
}

/// Monte Carlo left-right crossing probability at radius `r`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_crossing_probability(
    g: *const PpclustGenerator,
    w: *const PpclustWindow,
    r: f64,
    replications: usize,
    seed: u64,
    value: *mut f64,
    std_error: *mut f64,
) -> PpclustStatus {
    guard(|| {
        let (g, w) = (borrow(g, "generator")?, borrow(w, "window")?);
        let e = crossing_probability(&g.0, &w.0, r, replications, &RandomStream::new(seed))?;
        put(value, e.value, "value")?;
        put(std_error, e.std_error, "std_error")
    })
}

/// Ripley's K at each of `n` increasing radii (periodic windows only).
///
/// # Safety
/// Handles must be live; `radii`, `values` and `std_errors` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ppclust_ripley_k(
    g: *const PpclustGenerator,
    w: *const PpclustWindow,
    radii: *const f64,
    n: usize,
    replications: usize,
    seed: u64,
    values: *mut f64,
    std_errors: *mut f64,
) -> PpclustStatus {
    guard(|| {
        let (g, w) = (borrow(g, "generator")?, borrow(w, "window")?);
        let c = ripley_k(&g.0, &w.0, slice(radii, n, "radii")?, replications, &RandomStream::new(seed))?;
        let v: Vec<f64> = c.estimates.iter().map(|e| e.value).collect();
        let s: Vec<f64> = c.estimates.iter().map(|e| e.std_error).collect();
        copy_out(&v, values, n)?;
        copy_out(&s, std_errors, n)
    })
}

/// Convex-order check `d1 <=cx d2` for two count laws given as text, e.g.
/// `binomial(n=4, p=0.25)` and `poisson(lambda=1)`. `detail` receives the
/// minimum slack, the failing threshold, or the first mean.
///
/// # Safety
/// Strings must be NUL-terminated; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_check_cx(
    d1: *const c_char,
    d2: *const c_char,
    verdict: *mut PpclustCxVerdict,
    detail: *mut f64,
) -> PpclustStatus {
    guard(|| {
        let a: CountDistribution = text(d1, "d1")?.parse()?;
        let b: CountDistribution = text(d2, "d2")?.parse()?;
        let (v, x) = match check_cx(&a, &b) {
            CxVerdict::Holds { min_slack } => (PpclustCxVerdict::Holds, min_slack),
            CxVerdict::Fails { witness } => (PpclustCxVerdict::Fails, witness),
            CxVerdict::MeansDiffer { mean1, .. } => (PpclustCxVerdict::MeansDiffer, mean1),
        };
        put(verdict, v, "verdict")?;
        put(detail, x, "detail")
    })
}

/// Betti numbers of the Čech complex at radius `r` built to `max_dim`.
/// `*written` receives the count of numbers; `BufferTooSmall` if it exceeds `capacity`.
///
/// # Safety
/// `p` must be live; `buf` must have room for `capacity` values; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn ppclust_cech_betti(
    p: *const PpclustPattern,
    r: f64,
    max_dim: usize,
    buf: *mut u64,
    capacity: usize,
    written: *mut usize,
) -> PpclustStatus {
    guard(|| {
        let c = cech_complex(&borrow(p, "pattern")?.0, r, max_dim)?;
        let b: Vec<u64> = betti_numbers(&c)?.betti.iter().map(|x| *x as u64).collect();
        put(written, b.len(), "written")?;
        copy_out(&b, buf, capacity)
    })
}
