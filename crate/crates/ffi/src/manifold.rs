use std::ffi::c_char;

use bochner_lab::cli::{parse_spec, resolve_manifold};
use bochner_lab::geometry::{Expected, ManifoldSpec};

use crate::{emit, guard, handle, text, BlStatus, Failure};

/// A manifold with its structure: a zoo member or a parsed spec file.
pub struct BlManifold {
    pub(crate) spec: ManifoldSpec,
    pub(crate) expected: Option<Expected>,
}

/// Look up a built-in manifold (`s2` and `s6` are accepted as aliases).
///
/// # Safety
/// `name` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_manifold_from_name(
    name: *const c_char,
    out: *mut *mut BlManifold,
) -> BlStatus {
    guard(|| {
        let name = text(name, "name")?;
        if name.contains('/') || name.contains('.') {
            return Err(Failure::new(
                BlStatus::UnknownManifold,
                format!("no built-in manifold '{name}'"),
            ));
        }
        let (spec, expected) = resolve_manifold(name).map_err(|_| {
            Failure::new(
                BlStatus::UnknownManifold,
                format!("no built-in manifold '{name}'"),
            )
        })?;
        emit(out, BlManifold { spec, expected })
    })
}

/// Parse the text of a spec file.
///
/// # Safety
/// `source` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_manifold_from_spec(
    source: *const c_char,
    out: *mut *mut BlManifold,
) -> BlStatus {
    guard(|| {
        let spec = parse_spec(text(source, "source")?)
            .map_err(|e| Failure::new(BlStatus::Parse, e.to_string()))?;
        emit(
            out,
            BlManifold {
                spec,
                expected: None,
            },
        )
    })
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `m` is null or a live manifold handle.
#[no_mangle]
pub unsafe extern "C" fn bl_manifold_dim(m: *const BlManifold) -> usize {
    m.as_ref().map_or(0, |m| m.spec.dim())
}

/// Default grid resolution, or 0 for a null handle.
///
/// # Safety
/// `m` is null or a live manifold handle.
#[no_mangle]
pub unsafe extern "C" fn bl_manifold_default_resolution(m: *const BlManifold) -> usize {
    m.as_ref().map_or(0, |m| m.spec.default_resolution())
}

/// Copy the manifold name into `buf` (NUL-terminated, truncated to fit).
/// Returns the full name length in bytes, without the terminator.
///
/// # Safety
/// `m` is a live manifold handle; `buf` is valid for `cap` bytes or null
/// with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn bl_manifold_name(
    m: *const BlManifold,
    buf: *mut c_char,
    cap: usize,
) -> usize {
    let Ok(m) = handle(m, "manifold") else {
        return 0;
    };
    let name = m.spec.name().as_bytes();
    if !buf.is_null() && cap > 0 {
        let n = name.len().min(cap - 1);
        std::ptr::copy_nonoverlapping(name.as_ptr().cast(), buf, n);
        *buf.add(n) = 0;
    }
    name.len()
}

/// Release a manifold. Null is ignored.
///
/// # Safety
/// `m` is null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_manifold_free(m: *mut BlManifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}
