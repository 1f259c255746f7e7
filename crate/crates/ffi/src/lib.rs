//! C ABI over `qcm-core`.
//!
//! A `QcmStore` is an opaque handle owning one ensemble store. Numbers live
//! in the store and are referred to by `QcmReal4`, four ensemble ids. Every
//! fallible call returns a `QcmStatus`; on failure
//! [`qcm_last_error_message`] describes the error for the calling thread.
//! Panics never cross the boundary: they are reported as
//! `QCM_STATUS_INTERNAL`.
//!
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`qcm_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use qcm_core::arith::{self, Real1, Real2, Real4};
use qcm_core::expr::{self, EvalOptions, Mode};
use qcm_core::qcm::{EnsembleId, EnsembleStore, EventFilter};
use qcm_core::Error;

/// Opaque store handle.
pub struct QcmStore {
    inner: EnsembleStore<f64>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownEnsemble = 3,
    ConsumedEnsemble = 4,
    DenominatorNearZero = 5,
    DivisorNearZero = 6,
    ParseError = 7,
    NonFinite = 8,
    OutOfRange = 9,
    Statistics = 10,
    Internal = 99,
}

/// A real number `r2(num) / r2(den)` held in a store, as four ensemble ids.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QcmReal4 {
    pub num_plus: u64,
    pub num_minus: u64,
    pub den_plus: u64,
    pub den_minus: u64,
}

impl From<Real4> for QcmReal4 {
    fn from(x: Real4) -> Self {
        let [a, b, c, d] = x.ids().map(EnsembleId::raw);
        QcmReal4 {
            num_plus: a,
            num_minus: b,
            den_plus: c,
            den_minus: d,
        }
    }
}

impl From<QcmReal4> for Real4 {
    fn from(x: QcmReal4) -> Self {
        let r1 = |raw| Real1(EnsembleId::from_raw(raw));
        Real4 {
            num: Real2 {
                plus: r1(x.num_plus),
                minus: r1(x.num_minus),
            },
            den: Real2 {
                plus: r1(x.den_plus),
                minus: r1(x.den_minus),
            },
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QcmStatus {
    match e {
        Error::UnknownEnsemble(_) => QcmStatus::UnknownEnsemble,
        Error::ConsumedEnsemble(_) => QcmStatus::ConsumedEnsemble,
        Error::DenominatorNearZero { .. } => QcmStatus::DenominatorNearZero,
        Error::DivisorNearZero { .. } => QcmStatus::DivisorNearZero,
        Error::Parse(_) => QcmStatus::ParseError,
        Error::NonFinite(_) => QcmStatus::NonFinite,
        Error::OutOfRange { .. } => QcmStatus::OutOfRange,
        Error::DenominatorIndistinguishableFromZero { .. } => QcmStatus::Statistics,
        _ => QcmStatus::InvalidArgument,
    }
}

struct Fail(QcmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QcmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {msg}"));
            QcmStatus::Internal
        }
    }
}

unsafe fn store_mut<'a>(store: *mut QcmStore) -> Result<&'a mut EnsembleStore<f64>, Fail> {
    store
        .as_mut()
        .map(|s| &mut s.inner)
        .ok_or_else(|| null("store"))
}

unsafe fn store_ref<'a>(store: *const QcmStore) -> Result<&'a EnsembleStore<f64>, Fail> {
    store
        .as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| null("store"))
}

fn nonnull<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    nonnull(out)?;
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(QcmStatus::Internal, "string contains NUL".into()))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null("string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(QcmStatus::InvalidArgument, "string is not UTF-8".into()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qcm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New store with the default denominator floor. Never null.
#[no_mangle]
pub extern "C" fn qcm_store_new() -> *mut QcmStore {
    Box::into_raw(Box::new(QcmStore {
        inner: EnsembleStore::new(),
    }))
}

/// New store that refuses to decode denominators below `den_floor`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_store_with_den_floor(
    den_floor: f64,
    out: *mut *mut QcmStore,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let inner = EnsembleStore::with_den_floor(den_floor)?;
        write(out, Box::into_raw(Box::new(QcmStore { inner })))
    })
}

/// # Safety
/// `store` must be null or a handle from this library that is not used again.
#[no_mangle]
pub unsafe extern "C" fn qcm_store_free(store: *mut QcmStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Encodes `value` into four fresh ensembles.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_encode(
    store: *mut QcmStore,
    value: f64,
    out: *mut QcmReal4,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_mut(store)?;
        let x = arith::encode_real4(s, value)?;
        write(out, x.into())
    })
}

/// Decodes `x` without consuming it.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_decode(
    store: *const QcmStore,
    x: QcmReal4,
    out: *mut f64,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_ref(store)?;
        write(out, arith::r4(s, x.into())?)
    })
}

unsafe fn binary(
    store: *mut QcmStore,
    x: QcmReal4,
    y: QcmReal4,
    out: *mut QcmReal4,
    op: fn(&mut EnsembleStore<f64>, Real4, Real4) -> qcm_core::Result<Real4>,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_mut(store)?;
        let z = op(s, x.into(), y.into())?;
        write(out, z.into())
    })
}

/// `x + y`; consumes both operands.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_add(
    store: *mut QcmStore,
    x: QcmReal4,
    y: QcmReal4,
    out: *mut QcmReal4,
) -> QcmStatus {
    binary(store, x, y, out, arith::add_r4)
}

/// `x − y`; consumes both operands.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_sub(
    store: *mut QcmStore,
    x: QcmReal4,
    y: QcmReal4,
    out: *mut QcmReal4,
) -> QcmStatus {
    binary(store, x, y, out, arith::sub_r4)
}

/// `x · y`; consumes both operands.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_mul(
    store: *mut QcmStore,
    x: QcmReal4,
    y: QcmReal4,
    out: *mut QcmReal4,
) -> QcmStatus {
    binary(store, x, y, out, arith::mul_r4)
}

/// `x / y`; consumes both operands.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_div(
    store: *mut QcmStore,
    x: QcmReal4,
    y: QcmReal4,
    out: *mut QcmReal4,
) -> QcmStatus {
    binary(store, x, y, out, arith::div_r4)
}

/// `−x`. Swaps handles only; no gates are applied.
#[no_mangle]
pub extern "C" fn qcm_neg(x: QcmReal4) -> QcmReal4 {
    arith::neg_r4(x.into()).into()
}

/// `1/x`. Swaps handles only; fails when the numerator is below the floor.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_inv(
    store: *const QcmStore,
    x: QcmReal4,
    out: *mut QcmReal4,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_ref(store)?;
        write(out, arith::inv_r4(s, x.into())?.into())
    })
}

/// `xⁿ`; consumes `x`. With `renorm`, intermediate products are re-encoded.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_pow(
    store: *mut QcmStore,
    x: QcmReal4,
    n: u64,
    renorm: bool,
    out: *mut QcmReal4,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_mut(store)?;
        write(out, arith::pow_r4(s, x.into(), n, renorm)?.into())
    })
}

/// Re-encodes `x` at full component magnitude; consumes `x`.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_renormalize(
    store: *mut QcmStore,
    x: QcmReal4,
    out: *mut QcmReal4,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_mut(store)?;
        write(out, arith::renormalize(s, x.into())?.into())
    })
}

/// Copies `x` into four new ensembles; `x` stays usable.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_clone(
    store: *mut QcmStore,
    x: QcmReal4,
    out: *mut QcmReal4,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_mut(store)?;
        write(out, arith::clone_r4(s, x.into())?.into())
    })
}

/// Number of recorded events; only physical ones when `physical_only`.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_gate_count(
    store: *const QcmStore,
    physical_only: bool,
    out: *mut size_t,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_ref(store)?;
        let n = if physical_only {
            s.gate_count(&EventFilter::physical())
        } else {
            s.trace().len()
        };
        write(out, n)
    })
}

/// The store's event trace as JSON lines.
///
/// # Safety
/// `store` must be a live handle and `out` valid for writes. Free the
/// result with [`qcm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qcm_trace_jsonl(
    store: *const QcmStore,
    out: *mut *mut c_char,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let s = store_ref(store)?;
        write(out, into_c_string(s.trace_jsonl())?)
    })
}

/// Parses and evaluates `expression` on a fresh store, writing the report as
/// one JSON object. `shots == 0` selects exact readout; otherwise each
/// result ensemble is sampled `shots` times with `seed`.
///
/// # Safety
/// `expression` must be a NUL-terminated string and `out` valid for writes.
/// Free the result with [`qcm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qcm_eval_json(
    expression: *const c_char,
    renorm: bool,
    shots: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> QcmStatus {
    guard(|| {
        nonnull(out)?;
        let text = read_str(expression)?;
        let opts = EvalOptions {
            mode: if shots == 0 {
                Mode::Exact
            } else {
                Mode::Sampled { shots, seed }
            },
            renorm,
            ..EvalOptions::default()
        };
        let report = expr::evaluate_str(text, &opts)?;
        let json = report_json(&report)?;
        write(out, into_c_string(json)?)
    })
}

fn report_json(report: &expr::EvalReport) -> Result<String, Fail> {
    report
        .to_json()
        .map_err(|e| Fail(QcmStatus::Internal, e.to_string()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn qcm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
