#ifndef QCO_H
#define QCO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcoStatus {
  QCO_STATUS_OK = 0,
  QCO_STATUS_NULL_POINTER = 1,
  QCO_STATUS_INVALID_ARGUMENT = 2,
  QCO_STATUS_FORMAT = 3,
  QCO_STATUS_NOT_UNITARY = 4,
  QCO_STATUS_NOT_A_GROUP = 5,
  QCO_STATUS_NO_GAP = 6,
  QCO_STATUS_NUMERICAL = 7,
  QCO_STATUS_IO = 8,
  QCO_STATUS_PANIC = 9,
} QcoStatus;

/**
 * Opaque gate set.
 */
typedef struct QcoGateSet QcoGateSet;

/**
 * Opaque discrepancy profile.
 */
typedef struct QcoProfile QcoProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *qco_last_error_message(void);

/**
 * Parses a gate set from JSON text (the gate-set file format).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QcoStatus qco_gate_set_from_json(const char *json, struct QcoGateSet **out);

/**
 * Built-in group by name: `clifford` or `hurwitz`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum QcoStatus qco_gate_set_named_group(const char *name, struct QcoGateSet **out);

/**
 * Derived multiset `{c T c^dagger : c in group}` for a completion gate `T`
 * given as 8 doubles (proportional to a unitary).
 *
 * # Safety
 * `group` must be a live handle, `t_matrix` must point to 8 doubles, `out` must be writable.
 */
enum QcoStatus qco_gate_set_derived(const struct QcoGateSet *group,
                                    const double *t_matrix,
                                    struct QcoGateSet **out);

/**
 * Number of entries (with multiplicity).
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum QcoStatus qco_gate_set_len(const struct QcoGateSet *set, size_t *out);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void qco_gate_set_free(struct QcoGateSet *set);

/**
 * Block norms for spins `1..=t_max` of the uniform measure on `set`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum QcoStatus qco_delta_profile(const struct QcoGateSet *set,
                                 uint32_t t_max,
                                 struct QcoProfile **out);

/**
 * `delta(t)`, the largest block norm over spins `1..=t`.
 *
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum QcoStatus qco_profile_delta(const struct QcoProfile *profile, uint32_t t, double *out);

/**
 * Norm of the spin-`s` block.
 *
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum QcoStatus qco_profile_spin_norm(const struct QcoProfile *profile, uint32_t s, double *out);

/**
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum QcoStatus qco_profile_t_max(const struct QcoProfile *profile, uint32_t *out);

/**
 * # Safety
 * `profile` must be null or a handle not yet freed.
 */
void qco_profile_free(struct QcoProfile *profile);

/**
 * `ln n / ln(1/delta)`; fails with `NO_GAP` when `delta >= 1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcoStatus qco_q_value(size_t n, double delta, double *out);

/**
 * Kesten bound `2 sqrt(n-1) / n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcoStatus qco_delta_opt(size_t n, double *out);

/**
 * Value of Q at the Kesten bound.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcoStatus qco_q_opt_bar(size_t n, double *out);

/**
 * Kesten-McKay density at `x`: symmetric on `[-edge, edge]` or one-sided on `[0, edge]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcoStatus qco_km_density(double x, size_t n, bool symmetric, double *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qco_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCO_H */
