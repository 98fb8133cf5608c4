use std::collections::BTreeMap;
use std::ffi::{c_char, CString};

use bochner_lab::verify::{
    diagnose, is_known_check, run_check, run_suite, SuiteConfig, ToleranceProfile,
};
use serde::Serialize;

use crate::{emit, guard, handle, text, BlManifold, BlStatus, Failure};

/// Outcome of a check, a diagnosis or a suite run, held as its JSON
/// rendering plus the named numeric values.
pub struct BlReport {
    pass: bool,
    json: CString,
    values: BTreeMap<String, f64>,
}

impl BlReport {
    fn new<T: Serialize>(v: &T, pass: bool, values: BTreeMap<String, f64>) -> Self {
        let json = serde_json::to_string_pretty(v).expect("report serializes");
        BlReport {
            pass,
            json: CString::new(json).expect("JSON has no NUL"),
            values,
        }
    }
}

fn config(resolution: usize, seed: u64, strict: bool) -> Result<SuiteConfig, Failure> {
    if resolution == 1 {
        return Err(Failure::new(
            BlStatus::Evaluation,
            "resolution must be 0 (default) or at least 2",
        ));
    }
    Ok(SuiteConfig {
        seed,
        profile: if strict {
            ToleranceProfile::Strict
        } else {
            ToleranceProfile::Default
        },
        resolution: (resolution > 0).then_some(resolution),
        ..Default::default()
    })
}

/// Top-level numbers of a JSON object; `[min, max]` pairs become
/// `<name>_min` and `<name>_max`.
fn numeric_fields(v: &serde_json::Value) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    if let Some(obj) = v.as_object() {
        for (k, x) in obj {
            if let Some(f) = x.as_f64() {
                out.insert(k.clone(), f);
            } else if let Some([lo, hi]) = x.as_array().map(Vec::as_slice) {
                if let (Some(lo), Some(hi)) = (lo.as_f64(), hi.as_f64()) {
                    out.insert(format!("{k}_min"), lo);
                    out.insert(format!("{k}_max"), hi);
                }
            }
        }
    }
    out
}

/// Run one named check. `resolution` 0 means the manifold's default.
/// A check that runs but fails still returns `BL_STATUS_OK`; query
/// [`bl_report_pass`].
///
/// # Safety
/// `m` is a live manifold handle, `check` a NUL-terminated string and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_verify(
    m: *const BlManifold,
    check: *const c_char,
    resolution: usize,
    seed: u64,
    strict: bool,
    out: *mut *mut BlReport,
) -> BlStatus {
    guard(|| {
        let m = handle(m, "manifold")?;
        let check = text(check, "check")?;
        if !is_known_check(check) {
            return Err(Failure::new(
                BlStatus::UnknownName,
                format!("unknown check '{check}'"),
            ));
        }
        let cfg = config(resolution, seed, strict)?;
        let r = run_check(check, &m.spec, m.expected.as_ref(), &cfg)
            .map_err(|e| Failure::new(BlStatus::Evaluation, e))?;
        emit(out, BlReport::new(&r, r.pass, r.values.clone()))
    })
}

/// Integrated quantities and classification flags.
///
/// # Safety
/// `m` is a live manifold handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_diagnose(
    m: *const BlManifold,
    resolution: usize,
    seed: u64,
    out: *mut *mut BlReport,
) -> BlStatus {
    guard(|| {
        let m = handle(m, "manifold")?;
        let cfg = config(resolution, seed, false)?;
        let d = diagnose(&m.spec, &cfg)
            .map_err(|e| Failure::new(BlStatus::Evaluation, e.to_string()))?;
        let values = numeric_fields(&serde_json::to_value(&d).expect("serializes"));
        emit(out, BlReport::new(&d, d.pass, values))
    })
}

/// Every check on the named zoo members (`names` may be null with
/// `count == 0` for the whole zoo). The values of a suite report are
/// `checks` and `failed`.
///
/// # Safety
/// `names` points to `count` NUL-terminated strings; `out` is valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn bl_suite(
    names: *const *const c_char,
    count: usize,
    resolution: usize,
    seed: u64,
    strict: bool,
    out: *mut *mut BlReport,
) -> BlStatus {
    guard(|| {
        let mut cfg = config(resolution, seed, strict)?;
        if count > 0 {
            if names.is_null() {
                return Err(Failure::new(BlStatus::NullPointer, "names is null"));
            }
            let known = bochner_lab::geometry::zoo::names();
            let mut list = Vec::with_capacity(count);
            for k in 0..count {
                let n = text(*names.add(k), "manifold name")?;
                if !known.contains(&n) {
                    return Err(Failure::new(
                        BlStatus::UnknownManifold,
                        format!("no built-in manifold '{n}'"),
                    ));
                }
                list.push(n.to_string());
            }
            cfg.manifolds = Some(list);
        }
        let rep = run_suite(&cfg);
        let failed = rep.results.iter().filter(|r| !r.pass).count();
        let values = BTreeMap::from([
            ("checks".to_string(), rep.results.len() as f64),
            ("failed".to_string(), failed as f64),
        ]);
        emit(out, BlReport::new(&rep, rep.verdict, values))
    })
}

/// Whether every check in the report passed; false for a null handle.
///
/// # Safety
/// `r` is null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn bl_report_pass(r: *const BlReport) -> bool {
    r.as_ref().is_some_and(|r| r.pass)
}

/// JSON rendering, owned by the report. Null for a null handle.
///
/// # Safety
/// `r` is null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn bl_report_json(r: *const BlReport) -> *const c_char {
    r.as_ref().map_or(std::ptr::null(), |r| r.json.as_ptr())
}

/// Look up a named value.
///
/// # Safety
/// `r` is a live report handle, `name` a NUL-terminated string and `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bl_report_value(
    r: *const BlReport,
    name: *const c_char,
    out: *mut f64,
) -> BlStatus {
    guard(|| {
        let r = handle(r, "report")?;
        let name = text(name, "name")?;
        let v = *r.values.get(name).ok_or_else(|| {
            Failure::new(BlStatus::UnknownName, format!("no value named '{name}'"))
        })?;
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

/// Release a report. Null is ignored.
///
/// # Safety
/// `r` is null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_report_free(r: *mut BlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
