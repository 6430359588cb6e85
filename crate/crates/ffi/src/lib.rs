//! C ABI over the baerkit engine.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns a `BkStatus`; on
//! failure `bk_last_error` describes the most recent error on the calling
//! thread. Strings returned by the library are freed with `bk_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use baerkit::baer::{baer_invariant, detect_class, verify_class_bound, Settings};
use baerkit::lyndon::witt_dimension;
use baerkit::presentation::parse_input_file;
use baerkit::semidirect::decompose;
use baerkit::{AbelianInvariants, Error, InputFile};

/// Status codes; the numeric values match the command-line exit codes where
/// they overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BkStatus {
    BkOk = 0,
    BkVerdictFail = 1,
    BkParseError = 2,
    BkClassUndetermined = 3,
    BkCapGuard = 4,
    BkActionInvalid = 5,
    BkNullPointer = 6,
    BkInvalidArgument = 7,
    BkInternalError = 8,
}

/// Parsed input file.
pub struct BkInput {
    inner: InputFile,
}

/// Abelian group invariants.
pub struct BkInvariants {
    inner: AbelianInvariants,
}

const DEFAULT_KMAX: usize = 6;

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg.into()));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> BkStatus {
    match e.exit_code() {
        2 => BkStatus::BkParseError,
        3 => BkStatus::BkClassUndetermined,
        4 => BkStatus::BkCapGuard,
        5 => BkStatus::BkActionInvalid,
        _ => BkStatus::BkInternalError,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guarded(f: impl FnOnce() -> Result<BkStatus, (BkStatus, String)>) -> BkStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BkStatus::BkInternalError
        }
    }
}

fn engine(e: Error) -> (BkStatus, String) {
    (status_of(&e), e.to_string())
}

fn settings(cap_guard: u64) -> Settings {
    if cap_guard == 0 {
        Settings::default()
    } else {
        Settings {
            cap_guard: cap_guard as u128,
        }
    }
}

fn bound(class_bound: u32) -> Option<usize> {
    (class_bound != 0).then_some(class_bound as usize)
}

fn boxed(inv: AbelianInvariants) -> *mut BkInvariants {
    Box::into_raw(Box::new(BkInvariants { inner: inv }))
}

/// Parses an input file given as NUL-terminated UTF-8 text.
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bk_input_parse(text: *const c_char, out: *mut *mut BkInput) -> BkStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return Err((BkStatus::BkNullPointer, "null argument".into()));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (BkStatus::BkParseError, "input is not UTF-8".to_string()))?;
        let inner = parse_input_file(text).map_err(engine)?;
        *out = Box::into_raw(Box::new(BkInput { inner }));
        Ok(BkStatus::BkOk)
    })
}

/// # Safety
/// `input` must come from `bk_input_parse` or be null.
#[no_mangle]
pub unsafe extern "C" fn bk_input_free(input: *mut BkInput) {
    if !input.is_null() {
        drop(Box::from_raw(input));
    }
}

/// Number of group blocks in the input, 0 for a null handle.
///
/// # Safety
/// `input` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bk_input_group_count(input: *const BkInput) -> usize {
    input.as_ref().map_or(0, |i| i.inner.groups.len())
}

/// Baer-invariant of group `group_index` for the variety parameter `c`.
/// A `class_bound` of 0 asks for detection; a `cap_guard` of 0 uses the
/// default budget.
///
/// # Safety
/// `input` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bk_multiplier(
    input: *const BkInput,
    group_index: usize,
    c: u32,
    class_bound: u32,
    cap_guard: u64,
    out: *mut *mut BkInvariants,
) -> BkStatus {
    guarded(|| {
        let (Some(input), false) = (input.as_ref(), out.is_null()) else {
            return Err((BkStatus::BkNullPointer, "null argument".into()));
        };
        *out = ptr::null_mut();
        if c == 0 {
            return Err((BkStatus::BkInvalidArgument, "c must be at least 1".into()));
        }
        let p = input.inner.groups.get(group_index).ok_or_else(|| {
            (
                BkStatus::BkInvalidArgument,
                format!("no group at index {group_index}"),
            )
        })?;
        let s = settings(cap_guard);
        let k = match bound(class_bound) {
            Some(k) => {
                verify_class_bound(p, k, &s).map_err(engine)?;
                k
            }
            None => detect_class(p, DEFAULT_KMAX, &s)
                .map_err(engine)?
                .ok_or_else(|| {
                    engine(Error::ClassUndetermined {
                        k_max: DEFAULT_KMAX,
                    })
                })?,
        };
        let inv = baer_invariant(p, c as usize, k, &s).map_err(engine)?;
        *out = boxed(inv);
        Ok(BkStatus::BkOk)
    })
}

/// Builds the semidirect product described by the input's action block and
/// verifies its decomposition. Returns `BkOk` when every check passes and
/// `BkVerdictFail` otherwise; in both cases the three invariants are
/// written. Any of the output pointers may be null.
///
/// # Safety
/// `input` must be a live handle; non-null outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bk_semidirect_verify(
    input: *const BkInput,
    c: u32,
    class_bound: u32,
    cap_guard: u64,
    out_g: *mut *mut BkInvariants,
    out_b: *mut *mut BkInvariants,
    out_complement: *mut *mut BkInvariants,
) -> BkStatus {
    guarded(|| {
        let Some(input) = input.as_ref() else {
            return Err((BkStatus::BkNullPointer, "null input".into()));
        };
        for out in [out_g, out_b, out_complement] {
            if !out.is_null() {
                *out = ptr::null_mut();
            }
        }
        if c == 0 {
            return Err((BkStatus::BkInvalidArgument, "c must be at least 1".into()));
        }
        let spec = input.inner.action.as_ref().ok_or_else(|| {
            (
                BkStatus::BkInvalidArgument,
                "input has no action block".to_string(),
            )
        })?;
        let s = settings(cap_guard);
        let (_, report) =
            decompose(spec, c as usize, bound(class_bound), DEFAULT_KMAX, &s).map_err(engine)?;
        for (out, inv) in [
            (out_g, &report.invariants_g),
            (out_b, &report.invariants_b),
            (out_complement, &report.invariants_complement),
        ] {
            if !out.is_null() {
                *out = boxed(inv.clone());
            }
        }
        if report.all_pass() {
            Ok(BkStatus::BkOk)
        } else {
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name)
                .collect();
            set_error(format!("failed checks: {}", failed.join(", ")));
            Ok(BkStatus::BkVerdictFail)
        }
    })
}

/// # Safety
/// `inv` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bk_invariants_free_rank(inv: *const BkInvariants) -> usize {
    inv.as_ref().map_or(0, |i| i.inner.free_rank)
}

/// Torsion invariants as a comma-separated list (`"2,4"`, empty when
/// trivial). Null for a null handle.
///
/// # Safety
/// `inv` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bk_invariants_torsion_string(inv: *const BkInvariants) -> *mut c_char {
    let Some(inv) = inv.as_ref() else {
        return ptr::null_mut();
    };
    let s: Vec<String> = inv.inner.torsion.iter().map(|t| t.to_string()).collect();
    CString::new(s.join(",")).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `inv` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn bk_invariants_free(inv: *mut BkInvariants) {
    if !inv.is_null() {
        drop(Box::from_raw(inv));
    }
}

/// Copy of the last error message on this thread, or null.
#[no_mangle]
pub extern "C" fn bk_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .and_then(|m| CString::new(m.replace('\0', " ")).ok())
            .map_or(ptr::null_mut(), CString::into_raw)
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn bk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Rank of `γ_m/γ_{m+1}` of the free group on `n` generators.
#[no_mangle]
pub extern "C" fn bk_witt_dimension(n: usize, m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    witt_dimension(n, m)
}
