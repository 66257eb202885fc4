#ifndef WITTEN_LAB_H
#define WITTEN_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Invalid experiment configuration.
   */
  WL_STATUS_CONFIG = 3,
  /**
   * Solver or numerical failure.
   */
  WL_STATUS_NUMERICAL = 4,
  WL_STATUS_IO = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  WL_STATUS_PANIC = 6,
  /**
   * An experiment ran and at least one check failed.
   */
  WL_STATUS_CHECKS_FAILED = 7,
} WlStatus;

/**
 * Uniform periodic grid.
 */
typedef struct WlGrid WlGrid;

/**
 * Metric and potential sampled on a grid.
 */
typedef struct WlSnapshot WlSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *wl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wl_version(void);

/**
 * Grid with `dim` axes of `nodes[a]` points over period `periods[a]`.
 *
 * # Safety
 * `nodes` and `periods` point to `dim` elements; `out` is writable.
 */
enum WlStatus wl_grid_new(size_t dim,
                          const size_t *nodes,
                          const double *periods,
                          struct WlGrid **out);

/**
 * Number of nodes.
 *
 * # Safety
 * `grid` is a live handle; `out` is writable.
 */
enum WlStatus wl_grid_len(const struct WlGrid *grid, size_t *out);

/**
 * # Safety
 * `grid` is null or a handle from [`wl_grid_new`] not yet freed.
 */
void wl_grid_free(struct WlGrid *grid);

/**
 * Snapshot from a metric (null for flat) and a potential (null for zero).
 *
 * # Safety
 * `grid` is a live handle; `metric`, when non-null, holds
 * `sym_len(dim)·len` values; `potential`, when non-null, holds `len`.
 */
enum WlStatus wl_snapshot_new(const struct WlGrid *grid,
                              const double *metric,
                              const double *potential,
                              struct WlSnapshot **out);

/**
 * # Safety
 * `snap` is null or a handle from [`wl_snapshot_new`] not yet freed.
 */
void wl_snapshot_free(struct WlSnapshot *snap);

/**
 * `out = L f` with `L = Δ − ∇φ·∇`.
 *
 * # Safety
 * `snap` is live; `f` and `out` hold `len` values each.
 */
enum WlStatus wl_witten_laplacian(const struct WlSnapshot *snap,
                                  const double *f,
                                  double *out,
                                  size_t len);

/**
 * `∫ f dμ` in the weighted measure.
 *
 * # Safety
 * `snap` is live; `f` holds `len` values; `out` is writable.
 */
enum WlStatus wl_integrate(const struct WlSnapshot *snap, const double *f, size_t len, double *out);

/**
 * Per-node smallest eigenvalue of `Ric_{m,n}(L)` relative to `g`. Needs
 * `m > n`, or `m = n` with a constant potential.
 *
 * # Safety
 * `snap` is live; `out` holds `len` values.
 */
enum WlStatus wl_curvature_floor(const struct WlSnapshot *snap, double m, double *out, size_t len);

/**
 * Log-Sobolev constant `μ(t)` with `K ≥ 0`. `minimizer` may be null,
 * otherwise it receives `len` node values.
 *
 * # Safety
 * `snap` is live; `mu` is writable; `minimizer` is null or holds `len`.
 */
enum WlStatus wl_solve_mu(const struct WlSnapshot *snap,
                          double t,
                          double m,
                          double k,
                          size_t restarts,
                          uint64_t seed,
                          double *mu,
                          double *minimizer,
                          size_t len);

/**
 * Runs a built-in preset and writes its artifacts to `output_dir` (null:
 * the default location). Returns `ChecksFailed` when a check fails.
 *
 * # Safety
 * `name` is a NUL-terminated string; `output_dir` is null or one.
 */
enum WlStatus wl_run_preset(const char *name, const char *output_dir);

/**
 * Runs an experiment given as a JSON document.
 *
 * # Safety
 * `json` is a NUL-terminated string; `output_dir` is null or one.
 */
enum WlStatus wl_run_config(const char *json, const char *output_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WITTEN_LAB_H */
