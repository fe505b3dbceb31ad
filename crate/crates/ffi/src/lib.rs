//! C ABI over `qco-core`.
//!
//! Gate sets and profiles are opaque heap handles released with their `_free`
//! function. Every call returns a [`QcoStatus`]; on failure the message is
//! available from [`qco_last_error_message`] on the same thread until the next
//! failing call. Results are written through out-pointers, which are left
//! untouched on failure.
//!
//! Matrices cross the boundary as 8 doubles, row-major, each entry as
//! `(re, im)`: `[u00.re, u00.im, u01.re, u01.im, u10.re, u10.im, u11.re, u11.im]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qco_core::gates::{derived_set, named_group, normalize_to_projective, GateSet};
use qco_core::moments::{delta_profile, DeltaProfile};
use num_complex::Complex64;
use qco_core::{io, overhead, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    NotUnitary = 4,
    NotAGroup = 5,
    NoGap = 6,
    Numerical = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque gate set.
pub struct QcoGateSet {
    inner: GateSet,
}

/// Opaque discrepancy profile.
pub struct QcoProfile {
    inner: DeltaProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = clean);
}

fn status_of(e: &Error) -> QcoStatus {
    match e {
        Error::NotProportionalToUnitary { .. } | Error::SingularInput => QcoStatus::NotUnitary,
        Error::TInGroup | Error::NotAGroup | Error::CapExceeded { .. } => QcoStatus::NotAGroup,
        Error::NoGapAtScale { .. } => QcoStatus::NoGap,
        Error::DegenerateDelta { .. } | Error::Divergent | Error::EpsilonTooLarge { .. } | Error::DimensionTooLarge { .. } => {
            QcoStatus::Numerical
        }
        Error::Format(_) | Error::Json(_) => QcoStatus::Format,
        Error::Io(_) => QcoStatus::Io,
        _ => QcoStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (QcoStatus, String)>) -> QcoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcoStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QcoStatus::Panic
        }
    }
}

fn lib(e: Error) -> (QcoStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QcoStatus, String) {
    (QcoStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QcoStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (QcoStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (QcoStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qco_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a gate set from JSON text (the gate-set file format).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_gate_set_from_json(json: *const c_char, out: *mut *mut QcoGateSet) -> QcoStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let set = io::parse_gate_set(text, "ffi").map_err(lib)?;
        write(out, Box::into_raw(Box::new(QcoGateSet { inner: set })), "out")
    })
}

/// Built-in group by name: `clifford` or `hurwitz`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_gate_set_named_group(name: *const c_char, out: *mut *mut QcoGateSet) -> QcoStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let set = named_group(name).ok_or((QcoStatus::InvalidArgument, format!("unknown group {name}")))?;
        write(out, Box::into_raw(Box::new(QcoGateSet { inner: set })), "out")
    })
}

/// Derived multiset `{c T c^dagger : c in group}` for a completion gate `T`
/// given as 8 doubles (proportional to a unitary).
///
/// # Safety
/// `group` must be a live handle, `t_matrix` must point to 8 doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_gate_set_derived(
    group: *const QcoGateSet,
    t_matrix: *const f64,
    out: *mut *mut QcoGateSet,
) -> QcoStatus {
    guard(|| {
        let group = group.as_ref().ok_or_else(|| null("group"))?;
        if t_matrix.is_null() {
            return Err(null("t_matrix"));
        }
        let v = std::slice::from_raw_parts(t_matrix, 8);
        let c = |i: usize| Complex64::new(v[2 * i], v[2 * i + 1]);
        let t = normalize_to_projective(&[[c(0), c(1)], [c(2), c(3)]]).map_err(lib)?;
        let set = derived_set(&group.inner, &t).map_err(lib)?;
        write(out, Box::into_raw(Box::new(QcoGateSet { inner: set })), "out")
    })
}

/// Number of entries (with multiplicity).
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_gate_set_len(set: *const QcoGateSet, out: *mut usize) -> QcoStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        write(out, set.inner.len(), "out")
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qco_gate_set_free(set: *mut QcoGateSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Block norms for spins `1..=t_max` of the uniform measure on `set`.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_delta_profile(set: *const QcoGateSet, t_max: u32, out: *mut *mut QcoProfile) -> QcoStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let profile = delta_profile(&set.inner, t_max).map_err(lib)?;
        write(out, Box::into_raw(Box::new(QcoProfile { inner: profile })), "out")
    })
}

/// `delta(t)`, the largest block norm over spins `1..=t`.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_profile_delta(profile: *const QcoProfile, t: u32, out: *mut f64) -> QcoStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        let d = p
            .inner
            .delta(t)
            .ok_or((QcoStatus::InvalidArgument, format!("t = {t} outside 1..={}", p.inner.t_max)))?;
        write(out, d, "out")
    })
}

/// Norm of the spin-`s` block.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_profile_spin_norm(profile: *const QcoProfile, s: u32, out: *mut f64) -> QcoStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        let n = (s as usize)
            .checked_sub(1)
            .and_then(|i| p.inner.per_spin.get(i))
            .ok_or((QcoStatus::InvalidArgument, format!("spin {s} outside 1..={}", p.inner.t_max)))?;
        write(out, n.norm, "out")
    })
}

/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_profile_t_max(profile: *const QcoProfile, out: *mut u32) -> QcoStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        write(out, p.inner.t_max, "out")
    })
}

/// # Safety
/// `profile` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qco_profile_free(profile: *mut QcoProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// `ln n / ln(1/delta)`; fails with `NO_GAP` when `delta >= 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_q_value(n: usize, delta: f64, out: *mut f64) -> QcoStatus {
    guard(|| write(out, overhead::q_value(n, delta).map_err(lib)?, "out"))
}

/// Kesten bound `2 sqrt(n-1) / n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_delta_opt(n: usize, out: *mut f64) -> QcoStatus {
    guard(|| write(out, overhead::delta_opt(n).map_err(lib)?, "out"))
}

/// Value of Q at the Kesten bound.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_q_opt_bar(n: usize, out: *mut f64) -> QcoStatus {
    guard(|| write(out, overhead::q_opt_bar(n).map_err(lib)?, "out"))
}

/// Kesten-McKay density at `x`: symmetric on `[-edge, edge]` or one-sided on `[0, edge]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qco_km_density(x: f64, n: usize, symmetric: bool, out: *mut f64) -> QcoStatus {
    guard(|| write(out, overhead::km_density(x, n, symmetric).map_err(lib)?, "out"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qco_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
