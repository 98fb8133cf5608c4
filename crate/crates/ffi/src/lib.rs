//! C interface to bochner-lab.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `bl_*_new`/`bl_*_from_*` call and released by the matching `bl_*_free`.
//! Fallible calls return a [`BlStatus`] and write their result through an
//! out-pointer; on failure a description is available from
//! [`bl_last_error_message`] on the same thread. Panics never unwind into C:
//! they are caught and reported as [`BlStatus::Panic`].
//!
//! Strings passed in must be NUL-terminated UTF-8. Strings handed out by a
//! handle (`bl_report_json`) live as long as the handle; strings returned
//! with ownership (`bl_expr_to_string`) are released with [`bl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

mod expr;
mod manifold;
mod report;

pub use expr::*;
pub use manifold::*;
pub use report::*;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownManifold = 3,
    Parse = 4,
    Evaluation = 5,
    UnknownName = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

pub(crate) struct Failure(BlStatus, String);

impl Failure {
    pub(crate) fn new(status: BlStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

/// Run `f`, translating errors and panics into a status code.
pub(crate) fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            BlStatus::Panic
        }
    }
}

/// Borrow a C string as `&str`.
///
/// # Safety
/// `p` is null or a valid NUL-terminated string.
pub(crate) unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            BlStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(BlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Borrow the object behind a handle.
///
/// # Safety
/// `p` is null or a live handle of type `T`.
pub(crate) unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(BlStatus::NullPointer, format!("{what} is null")))
}

/// Store `v` behind a fresh handle in `*out`.
///
/// # Safety
/// `out` is null or valid for writes.
pub(crate) unsafe fn emit<T>(out: *mut *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(
            BlStatus::NullPointer,
            "output pointer is null",
        ));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failed call on this thread, or an empty
/// string after a successful one. Valid until the next `bl_*` call on the
/// same thread.
#[no_mangle]
pub extern "C" fn bl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned with ownership. Null is ignored.
///
/// # Safety
/// `s` is null or a string obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

pub(crate) fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}
