//! C ABI over mcmv-core. Operators live behind opaque handles; every call
//! returns an `McmvStatus` and writes results through out-pointers. The
//! message of the most recent failure on the calling thread is available
//! through `mcmv_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mcmv_core::cmv::VerblunskySequence;
use mcmv_core::magic::magic_check;
use mcmv_core::mcmv::PoleVector;
use mcmv_core::oracle::{recover_coefficients, QuadratureMeasure};
use mcmv_core::spectral::{bands_from_discriminant, SpectralMeasure};
use mcmv_core::transfer::MonodromyEvaluator;
use mcmv_core::{Error, C64};

/// Result codes shared by all entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McmvStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Input violates a precondition.
    Validation = 2,
    /// A numerical routine failed.
    Numeric = 3,
    /// The caller's buffer is too small; the required length was written.
    BufferTooSmall = 4,
    /// Internal panic caught at the boundary.
    Panic = 5,
}

/// Periodic MCMV operator: one block of Verblunsky coefficients, the pole
/// vector and the phase.
pub struct McmvOperator {
    seq: VerblunskySequence,
    poles: PoleVector,
    ev: MonodromyEvaluator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> McmvStatus {
    let status = if e.is_validation() { McmvStatus::Validation } else { McmvStatus::Numeric };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> McmvStatus) -> McmvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            McmvStatus::Panic
        }
    }
}

macro_rules! need {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer argument".into());
            return McmvStatus::NullPointer;
        }
    };
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail(err),
        }
    };
}

/// Reads `count` complex numbers stored as interleaved (re, im) pairs.
unsafe fn complex_slice(data: *const f64, count: usize) -> Vec<C64> {
    if count == 0 {
        return Vec::new();
    }
    std::slice::from_raw_parts(data, 2 * count).chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// Creates an operator. `coeffs` holds `n_coeffs` = 2n complex values and
/// `poles` holds n complex values (first one 0), both as interleaved
/// (re, im) pairs. `poles` may be null, meaning all poles are 0.
///
/// # Safety
/// The arrays must be readable for the given lengths; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mcmv_operator_new(
    coeffs: *const f64,
    n_coeffs: usize,
    poles: *const f64,
    n_poles: usize,
    phase: f64,
    out: *mut *mut McmvOperator,
) -> McmvStatus {
    guard(|| {
        need!(coeffs, out);
        *out = ptr::null_mut();
        if n_coeffs == 0 || !n_coeffs.is_multiple_of(2) {
            set_error(format!("need an even, positive number of coefficients, got {n_coeffs}"));
            return McmvStatus::Validation;
        }
        let vals = complex_slice(coeffs, n_coeffs);
        let z = if poles.is_null() {
            PoleVector::zeros(n_coeffs / 2)
        } else {
            tri!(PoleVector::from_values(&complex_slice(poles, n_poles)))
        };
        if z.n() * 2 != n_coeffs {
            set_error(format!("{} poles for {} coefficients", z.n(), n_coeffs));
            return McmvStatus::Validation;
        }
        let seq = tri!(VerblunskySequence::from_values(&vals, phase));
        let ev = tri!(MonodromyEvaluator::new(&seq, &z));
        *out = Box::into_raw(Box::new(McmvOperator { seq, poles: z, ev }));
        McmvStatus::Ok
    })
}

/// Releases an operator. Null is accepted.
///
/// # Safety
/// `op` must come from `mcmv_operator_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mcmv_operator_free(op: *mut McmvOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number n of poles (the period is 2n).
///
/// # Safety
/// `op` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mcmv_operator_n(op: *const McmvOperator, out: *mut usize) -> McmvStatus {
    guard(|| {
        need!(op, out);
        *out = (*op).poles.n();
        McmvStatus::Ok
    })
}

/// Discriminant Delta(z).
///
/// # Safety
/// `op`, `out_re`, `out_im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mcmv_discriminant(
    op: *const McmvOperator,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> McmvStatus {
    guard(|| {
        need!(op, out_re, out_im);
        let d = tri!((*op).ev.discriminant(C64::new(re, im)));
        *out_re = d.re;
        *out_im = d.im;
        McmvStatus::Ok
    })
}

/// Bands of the spectrum as (start angle, arc length) pairs written to
/// `out` (capacity `cap` pairs). `count` receives the number of bands;
/// when it exceeds `cap` nothing is written and BufferTooSmall is returned.
///
/// # Safety
/// `op` and `count` must be valid; `out` must hold `2 * cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn mcmv_bands(
    op: *const McmvOperator,
    grid: usize,
    out: *mut f64,
    cap: usize,
    count: *mut usize,
) -> McmvStatus {
    guard(|| {
        need!(op, count);
        let bd = tri!(bands_from_discriminant(&(*op).ev, grid));
        *count = bd.bands.len();
        if bd.bands.len() > cap {
            set_error(format!("{} bands do not fit in {cap}", bd.bands.len()));
            return McmvStatus::BufferTooSmall;
        }
        need!(out);
        let dst = std::slice::from_raw_parts_mut(out, 2 * cap);
        for (k, b) in bd.bands.iter().enumerate() {
            dst[2 * k] = b.start;
            dst[2 * k + 1] = b.length;
        }
        McmvStatus::Ok
    })
}

/// Total mass of the spectral measure (should be 1).
///
/// # Safety
/// `op` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mcmv_total_mass(op: *const McmvOperator, grid: usize, out: *mut f64) -> McmvStatus {
    guard(|| {
        need!(op, out);
        let sm = tri!(SpectralMeasure::from_evaluator(&(*op).ev, grid));
        *out = tri!(sm.total_mass());
        McmvStatus::Ok
    })
}

/// Checks Delta(A) = S^{2n} + S^{-2n} on rows [lo, hi). Writes the maximal
/// deviation and 1/0 for pass/fail.
///
/// # Safety
/// `op`, `max_deviation` and `pass` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mcmv_magic_check(
    op: *const McmvOperator,
    lo: i64,
    hi: i64,
    tol: f64,
    max_deviation: *mut f64,
    pass: *mut i32,
) -> McmvStatus {
    guard(|| {
        need!(op, max_deviation, pass);
        let r = tri!(magic_check(&(*op).seq, &(*op).poles, lo..hi, tol));
        *max_deviation = r.max_deviation;
        *pass = r.pass as i32;
        McmvStatus::Ok
    })
}

/// Recovers the first 4n coefficients from the spectral measure and writes
/// the largest deviation from the generating ones.
///
/// # Safety
/// `op` and `max_error` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mcmv_roundtrip_error(op: *const McmvOperator, grid: usize, max_error: *mut f64) -> McmvStatus {
    guard(|| {
        need!(op, max_error);
        let o = &*op;
        let sm = tri!(SpectralMeasure::from_evaluator(&o.ev, grid));
        let qm = tri!(QuadratureMeasure::from_spectral(&sm));
        let count = 2 * o.ev.period();
        let rec = tri!(recover_coefficients(&qm, &o.poles.orf_poles(), count));
        *max_error = rec.iter().enumerate().map(|(k, a)| (a - o.seq.a(k as i64)).norm()).fold(0.0, f64::max);
        McmvStatus::Ok
    })
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length, or 0
/// when there is no message.
///
/// # Safety
/// `buf` must hold `len` bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn mcmv_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mcmv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
