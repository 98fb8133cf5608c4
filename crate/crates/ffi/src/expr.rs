use std::ffi::c_char;

use bochner_lab::expr::{diff, eval, parse, Env, Expr};

use crate::{emit, guard, handle, owned_string, text, BlStatus, Failure};

/// A parsed scalar expression.
pub struct BlExpr(Expr);

/// Parse an expression.
///
/// # Safety
/// `source` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_expr_parse(source: *const c_char, out: *mut *mut BlExpr) -> BlStatus {
    guard(|| {
        let e = parse(text(source, "source")?)
            .map_err(|e| Failure::new(BlStatus::Parse, e.to_string()))?;
        emit(out, BlExpr(e))
    })
}

/// Symbolic partial derivative with respect to `var`.
///
/// # Safety
/// `e` is a live expression handle, `var` a NUL-terminated string and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_expr_diff(
    e: *const BlExpr,
    var: *const c_char,
    out: *mut *mut BlExpr,
) -> BlStatus {
    guard(|| {
        let e = handle(e, "expression")?;
        let var = text(var, "variable")?;
        emit(out, BlExpr(diff(&e.0, var)))
    })
}

/// Evaluate with `count` variable bindings.
///
/// # Safety
/// `names` and `values` point to `count` entries each (or are null with
/// `count == 0`); `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_expr_eval(
    e: *const BlExpr,
    names: *const *const c_char,
    values: *const f64,
    count: usize,
    out: *mut f64,
) -> BlStatus {
    guard(|| {
        let e = handle(e, "expression")?;
        if count > 0 && (names.is_null() || values.is_null()) {
            return Err(Failure::new(BlStatus::NullPointer, "bindings are null"));
        }
        let mut env = Env::new();
        for k in 0..count {
            env.insert(text(*names.add(k), "variable name")?, *values.add(k));
        }
        let v =
            eval(&e.0, &env).map_err(|err| Failure::new(BlStatus::Evaluation, err.to_string()))?;
        if out.is_null() {
            return Err(Failure::new(
                BlStatus::NullPointer,
                "output pointer is null",
            ));
        }
        *out = v;
        Ok(())
    })
}

/// Canonical text of the expression; release with `bl_string_free`.
/// Null for a null handle.
///
/// # Safety
/// `e` is null or a live expression handle.
#[no_mangle]
pub unsafe extern "C" fn bl_expr_to_string(e: *const BlExpr) -> *mut c_char {
    e.as_ref()
        .map_or(std::ptr::null_mut(), |e| owned_string(e.0.to_string()))
}

/// Release an expression. Null is ignored.
///
/// # Safety
/// `e` is null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_expr_free(e: *mut BlExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
