/* Generated by cbindgen from crates/ffi; do not edit. */

#ifndef BOCHNER_LAB_H
#define BOCHNER_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_UTF8 = 2,
  BL_STATUS_UNKNOWN_MANIFOLD = 3,
  BL_STATUS_PARSE = 4,
  BL_STATUS_EVALUATION = 5,
  BL_STATUS_UNKNOWN_NAME = 6,
  BL_STATUS_PANIC = 7,
} BlStatus;

// A parsed scalar expression.
typedef struct BlExpr BlExpr;

// A manifold with its structure: a zoo member or a parsed spec file.
typedef struct BlManifold BlManifold;

// Outcome of a check, a diagnosis or a suite run, held as its JSON
// rendering plus the named numeric values.
typedef struct BlReport BlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *bl_version(void);

// Message describing the last failed call on this thread, or an empty
// string after a successful one. Valid until the next `bl_*` call on the
// same thread.
const char *bl_last_error_message(void);

// Release a string returned with ownership. Null is ignored.
//
// # Safety
// `s` is null or a string obtained from this library and not yet freed.
void bl_string_free(char *s);

// Parse an expression.
//
// # Safety
// `source` is a NUL-terminated string; `out` is valid for writes.
enum BlStatus bl_expr_parse(const char *source, struct BlExpr **out);

// Symbolic partial derivative with respect to `var`.
//
// # Safety
// `e` is a live expression handle, `var` a NUL-terminated string and `out`
// valid for writes.
enum BlStatus bl_expr_diff(const struct BlExpr *e, const char *var, struct BlExpr **out);

// Evaluate with `count` variable bindings.
//
// # Safety
// `names` and `values` point to `count` entries each (or are null with
// `count == 0`); `out` is valid for writes.
enum BlStatus bl_expr_eval(const struct BlExpr *e,
                           const char *const *names,
                           const double *values,
                           size_t count,
                           double *out);

// Canonical text of the expression; release with `bl_string_free`.
// Null for a null handle.
//
// # Safety
// `e` is null or a live expression handle.
char *bl_expr_to_string(const struct BlExpr *e);

// Release an expression. Null is ignored.
//
// # Safety
// `e` is null or a live handle not used afterwards.
void bl_expr_free(struct BlExpr *e);

// Look up a built-in manifold (`s2` and `s6` are accepted as aliases).
//
// # Safety
// `name` is a NUL-terminated string; `out` is valid for writes.
enum BlStatus bl_manifold_from_name(const char *name, struct BlManifold **out);

// Parse the text of a spec file.
//
// # Safety
// `source` is a NUL-terminated string; `out` is valid for writes.
enum BlStatus bl_manifold_from_spec(const char *source, struct BlManifold **out);

// Dimension, or 0 for a null handle.
//
// # Safety
// `m` is null or a live manifold handle.
size_t bl_manifold_dim(const struct BlManifold *m);

// Default grid resolution, or 0 for a null handle.
//
// # Safety
// `m` is null or a live manifold handle.
size_t bl_manifold_default_resolution(const struct BlManifold *m);

// Copy the manifold name into `buf` (NUL-terminated, truncated to fit).
// Returns the full name length in bytes, without the terminator.
//
// # Safety
// `m` is a live manifold handle; `buf` is valid for `cap` bytes or null
// with `cap == 0`.
size_t bl_manifold_name(const struct BlManifold *m, char *buf, size_t cap);

// Release a manifold. Null is ignored.
//
// # Safety
// `m` is null or a live handle not used afterwards.
void bl_manifold_free(struct BlManifold *m);

// Run one named check. `resolution` 0 means the manifold's default.
// A check that runs but fails still returns `BL_STATUS_OK`; query
// [`bl_report_pass`].
//
// # Safety
// `m` is a live manifold handle, `check` a NUL-terminated string and `out`
// valid for writes.
enum BlStatus bl_verify(const struct BlManifold *m,
                        const char *check,
                        size_t resolution,
                        uint64_t seed,
                        bool strict,
                        struct BlReport **out);

// Integrated quantities and classification flags.
//
// # Safety
// `m` is a live manifold handle and `out` valid for writes.
enum BlStatus bl_diagnose(const struct BlManifold *m,
                          size_t resolution,
                          uint64_t seed,
                          struct BlReport **out);

// Every check on the named zoo members (`names` may be null with
// `count == 0` for the whole zoo). The values of a suite report are
// `checks` and `failed`.
//
// # Safety
// `names` points to `count` NUL-terminated strings; `out` is valid for
// writes.
enum BlStatus bl_suite(const char *const *names,
                       size_t count,
                       size_t resolution,
                       uint64_t seed,
                       bool strict,
                       struct BlReport **out);

// Whether every check in the report passed; false for a null handle.
//
// # Safety
// `r` is null or a live report handle.
bool bl_report_pass(const struct BlReport *r);

// JSON rendering, owned by the report. Null for a null handle.
//
// # Safety
// `r` is null or a live report handle.
const char *bl_report_json(const struct BlReport *r);

// Look up a named value.
//
// # Safety
// `r` is a live report handle, `name` a NUL-terminated string and `out`
// valid for writes.
enum BlStatus bl_report_value(const struct BlReport *r, const char *name, double *out);

// Release a report. Null is ignored.
//
// # Safety
// `r` is null or a live handle not used afterwards.
void bl_report_free(struct BlReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOCHNER_LAB_H */
