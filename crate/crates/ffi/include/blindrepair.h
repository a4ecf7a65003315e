#ifndef BLINDREPAIR_H
#define BLINDREPAIR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonzero error classes match the CLI exit codes.
 */
typedef enum BrStatus {
  BR_STATUS_OK = 0,
  BR_STATUS_NULL_POINTER = 1,
  BR_STATUS_CONFIG = 2,
  BR_STATUS_DATA = 3,
  BR_STATUS_NUMERICAL = 4,
  BR_STATUS_PANIC = 5,
} BrStatus;

/**
 * A solved coupling together with its solver trace.
 */
typedef struct BrCoupling BrCoupling;

/**
 * A projection map derived from a coupling.
 */
typedef struct BrMap BrMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *br_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *br_last_error(void);

/**
 * Band-constrained repair coupling on the scalar support `points` with
 * cost `|x − y|`. `lambda` holds `n` band half-widths.
 *
 * # Safety
 * Every array argument must point to `n` doubles; `out` must be writable.
 */
enum BrStatus br_dykstra_repair(const double *points,
                                size_t n,
                                const double *p,
                                const double *q,
                                const double *v,
                                const double *lambda,
                                double epsilon,
                                size_t iterations,
                                double varepsilon,
                                struct BrCoupling **out);

/**
 * Unconstrained entropic coupling between `p` and `q` with cost `|x − y|`.
 *
 * # Safety
 * Every array argument must point to `n` doubles; `out` must be writable.
 */
enum BrStatus br_bregman_baseline(const double *points,
                                  size_t n,
                                  const double *p,
                                  const double *q,
                                  double epsilon,
                                  size_t iterations,
                                  struct BrCoupling **out);

/**
 * Number of support points `n`; the coupling is `n × n`.
 *
 * # Safety
 * `coupling` must be a live handle and `n` writable.
 */
enum BrStatus br_coupling_size(const struct BrCoupling *coupling, size_t *n);

/**
 * Copies the entries in row-major order into `out`, which holds `len`
 * doubles and must be exactly `n·n` long.
 *
 * # Safety
 * `coupling` must be a live handle and `out` point to `len` doubles.
 */
enum BrStatus br_coupling_entries(const struct BrCoupling *coupling, double *out, size_t len);

/**
 * Iterations run and whether the band early exit fired.
 *
 * # Safety
 * `coupling` must be a live handle; output pointers may be null.
 */
enum BrStatus br_coupling_trace(const struct BrCoupling *coupling,
                                size_t *iterations,
                                bool *stopped_early);

/**
 * # Safety
 * `coupling` must be null or a handle not yet freed.
 */
void br_coupling_free(struct BrCoupling *coupling);

/**
 * Projection map of `coupling` relative to the source marginal `p`.
 *
 * # Safety
 * `coupling` must be a live handle, `p` point to `n` doubles and `out` be
 * writable.
 */
enum BrStatus br_map_new(const struct BrCoupling *coupling, const double *p, struct BrMap **out);

/**
 * Pushes the distribution `p` through the map into `out`; both hold `n`
 * doubles.
 *
 * # Safety
 * `map` must be a live handle; `p` and `out` must point to `n` doubles.
 */
enum BrStatus br_map_push_forward(const struct BrMap *map, const double *p, double *out, size_t n);

/**
 * # Safety
 * `map` must be null or a handle not yet freed.
 */
void br_map_free(struct BrMap *map);

/**
 * Total variation distance between two distributions on `n` points.
 *
 * # Safety
 * `p` and `q` must point to `n` doubles; `out` must be writable.
 */
enum BrStatus br_tv_distance(const double *p, const double *q, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLINDREPAIR_H */
