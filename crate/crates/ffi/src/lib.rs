//! C interface to the `dmcp` library.
//!
//! Sequences are opaque handles created by the `dmcp_sequence_*` and
//! `dmcp_derive` constructors and released with [`dmcp_sequence_free`].
//! Every fallible call returns a [`DmcpStatus`]; on failure
//! [`dmcp_last_error`] describes the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dmcp::robustness::{robustness_radius, Metric};
use dmcp::synthesis::{make_universal, solve_pp, verify_sequence, SynthesisProblem};
use dmcp::{
    compose, gate_distance, CompositeSequence, DetuningErrorMode, DmcpError, ErrorModel, SequenceKind, StateVector,
};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmcpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NoConvergence = 3,
    OutOfRange = 4,
    Degenerate = 5,
    Calibration = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DmcpComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque composite pulse sequence.
pub struct DmcpSequence {
    inner: CompositeSequence,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &DmcpError) -> DmcpStatus {
    match err {
        DmcpError::InvalidInput(_) | DmcpError::DimensionMismatch { .. } | DmcpError::NotSpecialUnitary(_) => {
            DmcpStatus::InvalidInput
        }
        DmcpError::NoConvergence { .. } => DmcpStatus::NoConvergence,
        DmcpError::OutOfRange { .. } => DmcpStatus::OutOfRange,
        DmcpError::DegenerateInput(_) => DmcpStatus::Degenerate,
        DmcpError::Calibration(_) => DmcpStatus::Calibration,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (DmcpStatus, String)>>(f: F) -> DmcpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmcpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DmcpStatus::Panic
        }
    }
}

fn lib<T>(r: dmcp::Result<T>) -> Result<T, (DmcpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DmcpStatus, String) {
    (DmcpStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], (DmcpStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn hand_out(seq: CompositeSequence, out: *mut *mut DmcpSequence) -> Result<(), (DmcpStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; caller provides a writable pointer slot.
    unsafe { *out = Box::into_raw(Box::new(DmcpSequence { inner: seq })) };
    Ok(())
}

fn borrow<'a>(seq: *const DmcpSequence) -> Result<&'a CompositeSequence, (DmcpStatus, String)> {
    if seq.is_null() {
        return Err(null("sequence"));
    }
    // SAFETY: non-null handles come from `hand_out` and stay valid until freed.
    Ok(unsafe { &(*seq).inner })
}

/// Message for the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dmcp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dmcp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Looks up a built-in table row such as `"pi-n4-o1"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn dmcp_sequence_from_table(name: *const c_char, out: *mut *mut DmcpSequence) -> DmcpStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let name =
            CStr::from_ptr(name).to_str().map_err(|_| (DmcpStatus::InvalidInput, "name is not UTF-8".to_string()))?;
        let row = lib(dmcp::tables::lookup(name))?;
        hand_out(row.sequence(), out)
    })
}

/// Sequence of unit-coupling segments of area π with the given ratios.
///
/// # Safety
/// `ratios` must point to `len` doubles; `out` must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn dmcp_sequence_from_ratios(
    ratios: *const f64,
    len: usize,
    theta: f64,
    order: u8,
    universal: bool,
    out: *mut *mut DmcpSequence,
) -> DmcpStatus {
    guard(|| {
        let r = slice(ratios, len, "ratios")?;
        let kind = if universal { SequenceKind::Universal } else { SequenceKind::PointToPoint };
        hand_out(lib(CompositeSequence::from_ratios(r, theta, order, kind))?, out)
    })
}

/// Solves for a universal sequence of `n` pieces from the starting ratios
/// `init` (`n/2` values) and verifies it at tolerance 10⁻³.
///
/// # Safety
/// `init` must point to `init_len` doubles; `out` must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn dmcp_derive(
    theta: f64,
    n: usize,
    order: u8,
    init: *const f64,
    init_len: usize,
    out: *mut *mut DmcpSequence,
) -> DmcpStatus {
    guard(|| {
        let problem = lib(SynthesisProblem::for_sequence_length(theta, n, order))?;
        let seed = slice(init, init_len, "init")?;
        let half = lib(solve_pp(&problem, seed))?;
        let seq = lib(make_universal(&half, theta, order))?;
        let report = lib(verify_sequence(&seq, 1e-3))?;
        if !report.passed {
            return Err((DmcpStatus::NoConvergence, format!("gate distance {:.3e} above 1e-3", report.gate_distance)));
        }
        hand_out(seq, out)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `seq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dmcp_sequence_free(seq: *mut DmcpSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Number of segments, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dmcp_sequence_len(seq: *const DmcpSequence) -> usize {
    borrow(seq).map(|s| s.len()).unwrap_or(0)
}

/// Copies the detuning ratios into `buf`.
///
/// `written` receives the segment count even when `cap` is too small.
///
/// # Safety
/// `buf` must have room for `cap` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn dmcp_sequence_ratios(
    seq: *const DmcpSequence,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> DmcpStatus {
    guard(|| {
        let ratios = borrow(seq)?.ratios();
        if !written.is_null() {
            *written = ratios.len();
        }
        if cap < ratios.len() {
            return Err((DmcpStatus::BufferTooSmall, format!("need room for {} ratios", ratios.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(ratios.as_ptr(), buf, ratios.len());
        Ok(())
    })
}

fn error_model(seq: &CompositeSequence, area: f64, coupling: f64, detuning: f64, gamma: f64) -> ErrorModel {
    ErrorModel::uniform(seq.len(), coupling, detuning, DetuningErrorMode::Relative)
        .with_area_scale(area)
        .with_gamma(gamma)
}

/// Propagator under uniform errors, row-major into `out[4]`.
///
/// # Safety
/// `out` must point to 4 writable `DmcpComplex` values.
#[no_mangle]
pub unsafe extern "C" fn dmcp_compose(
    seq: *const DmcpSequence,
    area_error: f64,
    coupling_error: f64,
    detuning_error: f64,
    gamma: f64,
    out: *mut DmcpComplex,
) -> DmcpStatus {
    guard(|| {
        let s = borrow(seq)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let u = lib(compose(s, &error_model(s, area_error, coupling_error, detuning_error, gamma)))?;
        for (k, z) in u.as_slice().iter().enumerate() {
            *out.add(k) = DmcpComplex { re: z.re, im: z.im };
        }
        Ok(())
    })
}

/// `1 − |tr(U†V)|/2` between the propagator at the given area error and the target.
///
/// # Safety
/// `out` must be a writable double.
#[no_mangle]
pub unsafe extern "C" fn dmcp_gate_distance(seq: *const DmcpSequence, area_error: f64, out: *mut f64) -> DmcpStatus {
    guard(|| {
        let s = borrow(seq)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let target = lib(s.target_rotation())?.matrix();
        *out = gate_distance(&lib(compose(s, &ErrorModel::area(area_error)))?, &target);
        Ok(())
    })
}

/// Largest area error keeping `1 − F ≤ threshold` from `|0⟩`.
///
/// # Safety
/// `out` must be a writable double.
#[no_mangle]
pub unsafe extern "C" fn dmcp_robustness_radius(seq: *const DmcpSequence, threshold: f64, out: *mut f64) -> DmcpStatus {
    guard(|| {
        let s = borrow(seq)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ground = lib(StateVector::basis(2, 0))?;
        *out = lib(robustness_radius(s, &ground, threshold, Metric::State))?;
        Ok(())
    })
}
