//! C ABI over `liens-core`.
//!
//! Every fallible function returns a [`LiensStatus`]; on failure the message
//! is available from [`liens_last_error`] on the same thread. Handles are
//! opaque and owned by the caller, who releases them with the matching
//! `_free` function. Grids built through this interface have side `2π`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use liens::calculus::{self, DiffPoly};
use liens::diagnostics;
use liens::lie::{self, PropagateOptions, StepStats};
use liens::oracles::{self, AnalyticFlow};
use liens::snapshot::{self, Snapshot};
use liens::{Error, Grid, RealVectorField, SpectralVectorField, Viscosity};

/// Result codes shared by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiensStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    GridMismatch = 4,
    NotSolenoidal = 5,
    NotHermitian = 6,
    StepFailed = 7,
    UnstableStep = 8,
    Format = 9,
    Parse = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// A velocity field in Fourier space.
pub struct LiensField {
    inner: SpectralVectorField,
}

/// A differential polynomial in `u_0, u_1, ...` with rational coefficients.
pub struct LiensDiffPoly {
    inner: DiffPoly,
}

/// Summary of a series propagation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LiensPropagateStats {
    pub steps: usize,
    pub max_order: usize,
    pub min_dt: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(LiensStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidGrid(_) => LiensStatus::InvalidGrid,
            Error::GridMismatch(_) => LiensStatus::GridMismatch,
            Error::NotSolenoidal { .. } => LiensStatus::NotSolenoidal,
            Error::NotHermitian { .. } => LiensStatus::NotHermitian,
            Error::StepFailed { .. } => LiensStatus::StepFailed,
            Error::UnstableStep { .. } => LiensStatus::UnstableStep,
            Error::Format(_) => LiensStatus::Format,
            Error::Parse { .. } => LiensStatus::Parse,
            Error::Io(_) => LiensStatus::Io,
            Error::NonFinite { .. } | Error::InvalidArgument(_) | Error::Config { .. } => {
                LiensStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LiensStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LiensStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LiensStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {message}"));
            LiensStatus::Panic
        }
    }
}

unsafe fn field_ref<'a>(f: *const LiensField) -> Result<&'a SpectralVectorField, Failure> {
    f.as_ref().map(|f| &f.inner).ok_or_else(|| null("field"))
}

unsafe fn poly_ref<'a>(p: *const LiensDiffPoly) -> Result<&'a DiffPoly, Failure> {
    p.as_ref().map(|p| &p.inner).ok_or_else(|| null("polynomial"))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        Failure(LiensStatus::InvalidArgument, format!("{what} is not valid UTF-8"))
    })
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn emit_field(out: *mut *mut LiensField, inner: SpectralVectorField) -> Result<(), Failure> {
    emit(out, LiensField { inner })
}

unsafe fn write_scalar(out: *mut f64, value: f64) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

fn viscosity(nu: f64) -> Result<Viscosity, Failure> {
    Ok(Viscosity::new(nu)?)
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn liens_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Taylor-Green vortex `U (cos x sin y, -sin x cos y)` on an `n x n` grid.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_taylor_green_2d(
    n: usize,
    amplitude: f64,
    out: *mut *mut LiensField,
) -> LiensStatus {
    guard(|| {
        let grid = Grid::periodic(2, n)?;
        let flow = AnalyticFlow::TaylorGreen2d { amplitude };
        let f = oracles::analytic_field(&flow, 0.0, Viscosity::inviscid(), &grid)?;
        emit_field(out, f)
    })
}

/// ABC flow with coefficients `a`, `b`, `c` on an `n^3` grid.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_abc(
    n: usize,
    a: f64,
    b: f64,
    c: f64,
    out: *mut *mut LiensField,
) -> LiensStatus {
    guard(|| {
        let grid = Grid::periodic(3, n)?;
        let f = oracles::analytic_field(&AnalyticFlow::abc(a, b, c), 0.0, Viscosity::inviscid(), &grid)?;
        emit_field(out, f)
    })
}

/// Seeded random solenoidal, dealiased field with spectrum peaked at `peak_k`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_random(
    dim: usize,
    n: usize,
    seed: u64,
    peak_k: usize,
    amplitude: f64,
    out: *mut *mut LiensField,
) -> LiensStatus {
    guard(|| {
        let grid = Grid::periodic(dim, n)?;
        emit_field(out, oracles::random_divfree(seed, &grid, peak_k, amplitude)?)
    })
}

/// Builds a field from `dim * n^dim` real samples, component-major with x
/// varying fastest.
///
/// # Safety
/// `samples` must point to `len` readable doubles and `out` must be valid
/// for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_from_physical(
    dim: usize,
    n: usize,
    samples: *const f64,
    len: usize,
    out: *mut *mut LiensField,
) -> LiensStatus {
    guard(|| {
        let grid = Grid::periodic(dim, n)?;
        if samples.is_null() {
            return Err(null("samples"));
        }
        let expected = dim * grid.len();
        if len != expected {
            return Err(Failure(
                LiensStatus::InvalidArgument,
                format!("expected {expected} samples, got {len}"),
            ));
        }
        let data = std::slice::from_raw_parts(samples, len);
        let components = data.chunks(grid.len()).map(<[f64]>::to_vec).collect();
        let real = RealVectorField::new(grid, components)?;
        emit_field(out, liens::grid::to_spectral(&real)?)
    })
}

/// Reads a snapshot file (physical or spectral payload).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_load(path: *const c_char, out: *mut *mut LiensField) -> LiensStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        emit_field(out, snapshot::load(path)?.into_spectral())
    })
}

/// Writes `field` as a physical-space snapshot.
///
/// # Safety
/// `field` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn liens_field_save(field: *const LiensField, path: *const c_char) -> LiensStatus {
    guard(|| {
        let f = field_ref(field)?;
        let path = c_str(path, "path")?;
        snapshot::save(path, &Snapshot::Physical(f.to_physical()?))?;
        Ok(())
    })
}

/// Releases a field. Null is ignored.
///
/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn liens_field_free(field: *mut LiensField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Spatial dimension, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn liens_field_dim(field: *const LiensField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.grid().dim())
}

/// Points per side, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn liens_field_n(field: *const LiensField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.grid().n())
}

/// `½ ∫ |v|² dx`.
///
/// # Safety
/// `field` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_energy(field: *const LiensField, out: *mut f64) -> LiensStatus {
    guard(|| write_scalar(out, diagnostics::energy(field_ref(field)?)))
}

/// `Σ_ij ∫ (∂_j v_i)² dx`.
///
/// # Safety
/// `field` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_enstrophy(field: *const LiensField, out: *mut f64) -> LiensStatus {
    guard(|| write_scalar(out, diagnostics::enstrophy_norm(field_ref(field)?)))
}

/// Largest `|div v|` over the grid.
///
/// # Safety
/// `field` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn liens_field_div_max(field: *const LiensField, out: *mut f64) -> LiensStatus {
    guard(|| write_scalar(out, diagnostics::div_max(field_ref(field)?)))
}

/// Copies the real samples of all components into `buf`, in the layout
/// accepted by [`liens_field_from_physical`]. `len` must be at least
/// `dim * n^dim`.
///
/// # Safety
/// `field` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn liens_field_copy_physical(
    field: *const LiensField,
    buf: *mut f64,
    len: usize,
) -> LiensStatus {
    guard(|| {
        let f = field_ref(field)?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let needed = f.grid().dim() * f.grid().len();
        if len < needed {
            return Err(Failure(
                LiensStatus::BufferTooSmall,
                format!("buffer holds {len} doubles, need {needed}"),
            ));
        }
        let phys = f.to_physical()?;
        let dst = std::slice::from_raw_parts_mut(buf, needed);
        for (chunk, comp) in dst.chunks_mut(f.grid().len()).zip(phys.components()) {
            chunk.copy_from_slice(comp);
        }
        Ok(())
    })
}

/// Advances `field` to `t_end` with the adaptive series propagator.
/// `max_order` of 0 selects the default. `stats` may be null.
///
/// # Safety
/// `field` must be a live handle, `out` valid for a pointer write and
/// `stats` null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn liens_propagate(
    field: *const LiensField,
    nu: f64,
    t_end: f64,
    tol: f64,
    max_order: usize,
    out: *mut *mut LiensField,
    stats: *mut LiensPropagateStats,
) -> LiensStatus {
    guard(|| {
        let f = field_ref(field)?;
        let mut opts = PropagateOptions {
            tol,
            ..PropagateOptions::default()
        };
        if max_order > 0 {
            opts.max_order = max_order;
        }
        let mut summary = LiensPropagateStats {
            min_dt: f64::INFINITY,
            ..Default::default()
        };
        let mut observe = |_: f64, _: &SpectralVectorField, s: &StepStats| {
            summary.steps += 1;
            summary.max_order = summary.max_order.max(s.order_used);
            summary.min_dt = summary.min_dt.min(s.dt);
        };
        let v = lie::propagate(f, viscosity(nu)?, t_end, opts, &mut observe)?;
        if summary.steps == 0 {
            summary.min_dt = 0.0;
        }
        emit_field(out, v)?;
        if let Some(s) = stats.as_mut() {
            *s = summary;
        }
        Ok(())
    })
}

/// Advances `field` to `t_end` with fixed-step RK4.
///
/// # Safety
/// `field` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_rk4(
    field: *const LiensField,
    nu: f64,
    t_end: f64,
    dt: f64,
    out: *mut *mut LiensField,
) -> LiensStatus {
    guard(|| {
        let f = field_ref(field)?;
        emit_field(out, oracles::rk4_propagate(f, viscosity(nu)?, t_end, dt)?)
    })
}

/// Parses text such as `1/10*u_2 - u_0*u_1`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_diffpoly_parse(text: *const c_char, out: *mut *mut LiensDiffPoly) -> LiensStatus {
    guard(|| {
        let inner = calculus::parse(c_str(text, "text")?)?;
        emit(out, LiensDiffPoly { inner })
    })
}

/// `A_F^n u` for the generator of `u_t = F`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn liens_diffpoly_a_power_u(
    f: *const LiensDiffPoly,
    n: i64,
    out: *mut *mut LiensDiffPoly,
) -> LiensStatus {
    guard(|| {
        let inner = calculus::a_power_u(poly_ref(f)?, n)?;
        emit(out, LiensDiffPoly { inner })
    })
}

/// Canonical text of `p`, or null on a null handle. Release it with
/// [`liens_string_free`].
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn liens_diffpoly_to_string(p: *const LiensDiffPoly) -> *mut c_char {
    match p.as_ref() {
        Some(p) => CString::new(p.inner.to_string()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// Releases a polynomial. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn liens_diffpoly_free(p: *mut LiensDiffPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn liens_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
