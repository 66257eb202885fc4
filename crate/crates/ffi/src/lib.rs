//! C ABI over the numerical core.
//!
//! Every function returns a [`WlStatus`]; on failure the message is kept in
//! a thread-local slot readable through [`wl_last_error_message`]. Handles
//! are opaque and owned by the caller, who releases them with the matching
//! `*_free`. Node arrays are in grid order with the last axis fastest.
//! Symmetric tensors are component-major: `sym_len(n)` blocks of `len`
//! values, components in upper-triangle row order (`g00, g01, …, g11, …`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use witten_lab::entropy::bakry_emery_m_or_n;
use witten_lab::experiments::{self, ExperimentConfig};
use witten_lab::geometry::{sym_len, GeometrySnapshot, Grid, ScalarField, SymTensorField};
use witten_lab::logsobolev::{LogSobolevProblem, SolverOptions};
use witten_lab::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Invalid experiment configuration.
    Config = 3,
    /// Solver or numerical failure.
    Numerical = 4,
    Io = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
    /// An experiment ran and at least one check failed.
    ChecksFailed = 7,
}

/// Uniform periodic grid.
pub struct WlGrid(Grid);

/// Metric and potential sampled on a grid.
pub struct WlSnapshot(GeometrySnapshot);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Fail(WlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) => WlStatus::Config,
            Error::Io(_) | Error::Json(_) => WlStatus::Io,
            Error::InvalidInput(_) | Error::Dimension(_) | Error::Parameter(_) | Error::Precondition(_) => {
                WlStatus::InvalidArgument
            }
            _ => WlStatus::Numerical,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WlStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> WlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WlStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WlStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(WlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn wl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Grid with `dim` axes of `nodes[a]` points over period `periods[a]`.
///
/// # Safety
/// `nodes` and `periods` point to `dim` elements; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_new(
    dim: usize,
    nodes: *const usize,
    periods: *const f64,
    out: *mut *mut WlGrid,
) -> WlStatus {
    guard(|| {
        if nodes.is_null() {
            return Err(null("nodes"));
        }
        let nodes = slice::from_raw_parts(nodes, dim);
        let periods = input(periods, dim, "periods")?;
        store(out, WlGrid(Grid::new(nodes, periods)?))
    })
}

/// Number of nodes.
///
/// # Safety
/// `grid` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_len(grid: *const WlGrid, out: *mut usize) -> WlStatus {
    guard(|| {
        let grid = grid.as_ref().ok_or_else(|| null("grid"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = grid.0.len();
        Ok(())
    })
}

/// # Safety
/// `grid` is null or a handle from [`wl_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wl_grid_free(grid: *mut WlGrid) {
    if !grid.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(grid))));
    }
}

/// Snapshot from a metric (null for flat) and a potential (null for zero).
///
/// # Safety
/// `grid` is a live handle; `metric`, when non-null, holds
/// `sym_len(dim)·len` values; `potential`, when non-null, holds `len`.
#[no_mangle]
pub unsafe extern "C" fn wl_snapshot_new(
    grid: *const WlGrid,
    metric: *const f64,
    potential: *const f64,
    out: *mut *mut WlSnapshot,
) -> WlStatus {
    guard(|| {
        let grid = &grid.as_ref().ok_or_else(|| null("grid"))?.0;
        let len = grid.len();
        let metric = if metric.is_null() {
            SymTensorField::identity(grid)
        } else {
            let values = input(metric, sym_len(grid.dim()) * len, "metric")?;
            SymTensorField::new(grid, values.chunks(len).map(<[f64]>::to_vec).collect())?
        };
        let potential = if potential.is_null() {
            ScalarField::zeros(grid)
        } else {
            ScalarField::new(grid, input(potential, len, "potential")?.to_vec())?
        };
        store(out, WlSnapshot(GeometrySnapshot::new(metric, potential)?))
    })
}

/// # Safety
/// `snap` is null or a handle from [`wl_snapshot_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wl_snapshot_free(snap: *mut WlSnapshot) {
    if !snap.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(snap))));
    }
}

/// `out = L f` with `L = Δ − ∇φ·∇`.
///
/// # Safety
/// `snap` is live; `f` and `out` hold `len` values each.
#[no_mangle]
pub unsafe extern "C" fn wl_witten_laplacian(
    snap: *const WlSnapshot,
    f: *const f64,
    out: *mut f64,
    len: usize,
) -> WlStatus {
    guard(|| {
        let snap = &snap.as_ref().ok_or_else(|| null("snapshot"))?.0;
        let f = ScalarField::new(snap.grid(), input(f, len, "f")?.to_vec())?;
        output(out, len, "out")?.copy_from_slice(snap.witten_laplacian(&f)?.values());
        Ok(())
    })
}

/// `∫ f dμ` in the weighted measure.
///
/// # Safety
/// `snap` is live; `f` holds `len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn wl_integrate(snap: *const WlSnapshot, f: *const f64, len: usize, out: *mut f64) -> WlStatus {
    guard(|| {
        let snap = &snap.as_ref().ok_or_else(|| null("snapshot"))?.0;
        let f = ScalarField::new(snap.grid(), input(f, len, "f")?.to_vec())?;
        *out.as_mut().ok_or_else(|| null("out"))? = snap.integrate(&f)?;
        Ok(())
    })
}

/// Per-node smallest eigenvalue of `Ric_{m,n}(L)` relative to `g`. Needs
/// `m > n`, or `m = n` with a constant potential.
///
/// # Safety
/// `snap` is live; `out` holds `len` values.
#[no_mangle]
pub unsafe extern "C" fn wl_curvature_floor(snap: *const WlSnapshot, m: f64, out: *mut f64, len: usize) -> WlStatus {
    guard(|| {
        let snap = &snap.as_ref().ok_or_else(|| null("snapshot"))?.0;
        let floor = snap.min_rel_eigenvalue(&bakry_emery_m_or_n(snap, m)?)?;
        let out = output(out, len, "out")?;
        if len != floor.values().len() {
            return Err(Fail(WlStatus::InvalidArgument, format!("out holds {len} values, grid has {}", floor.values().len())));
        }
        out.copy_from_slice(floor.values());
        Ok(())
    })
}

/// Log-Sobolev constant `μ(t)` with `K ≥ 0`. `minimizer` may be null,
/// otherwise it receives `len` node values.
///
/// # Safety
/// `snap` is live; `mu` is writable; `minimizer` is null or holds `len`.
#[no_mangle]
pub unsafe extern "C" fn wl_solve_mu(
    snap: *const WlSnapshot,
    t: f64,
    m: f64,
    k: f64,
    restarts: usize,
    seed: u64,
    mu: *mut f64,
    minimizer: *mut f64,
    len: usize,
) -> WlStatus {
    guard(|| {
        let snap = &snap.as_ref().ok_or_else(|| null("snapshot"))?.0;
        let mu = mu.as_mut().ok_or_else(|| null("mu"))?;
        let problem = LogSobolevProblem::mu_k(snap, t, m, k)?;
        let solution = problem.solve(&SolverOptions { restarts, seed, ..SolverOptions::default() })?;
        if !minimizer.is_null() {
            let out = output(minimizer, len, "minimizer")?;
            if len != solution.u.values().len() {
                return Err(Fail(WlStatus::InvalidArgument, "minimizer length does not match the grid".into()));
            }
            out.copy_from_slice(solution.u.values());
        }
        *mu = solution.mu;
        Ok(())
    })
}

fn run(config: ExperimentConfig, output_dir: Option<PathBuf>) -> Result<(), Fail> {
    let mut config = config;
    if output_dir.is_some() {
        config.output = output_dir;
    }
    if experiments::run(&config)?.passed() {
        Ok(())
    } else {
        Err(Fail(WlStatus::ChecksFailed, format!("experiment {} failed its checks", config.name)))
    }
}

unsafe fn optional_dir(p: *const c_char) -> Result<Option<PathBuf>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        Ok(Some(PathBuf::from(text(p, "output_dir")?)))
    }
}

/// Runs a built-in preset and writes its artifacts to `output_dir` (null:
/// the default location). Returns `ChecksFailed` when a check fails.
///
/// # Safety
/// `name` is a NUL-terminated string; `output_dir` is null or one.
#[no_mangle]
pub unsafe extern "C" fn wl_run_preset(name: *const c_char, output_dir: *const c_char) -> WlStatus {
    guard(|| {
        let name = text(name, "name")?;
        let config = experiments::preset(name)
            .ok_or_else(|| Fail(WlStatus::InvalidArgument, format!("no preset named {name:?}")))?;
        run(config, optional_dir(output_dir)?)
    })
}

/// Runs an experiment given as a JSON document.
///
/// # Safety
/// `json` is a NUL-terminated string; `output_dir` is null or one.
#[no_mangle]
pub unsafe extern "C" fn wl_run_config(json: *const c_char, output_dir: *const c_char) -> WlStatus {
    guard(|| run(ExperimentConfig::from_json(text(json, "json")?)?, optional_dir(output_dir)?))
}
