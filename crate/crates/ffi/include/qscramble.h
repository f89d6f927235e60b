#ifndef QSCRAMBLE_H
#define QSCRAMBLE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

enum QsStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  QS_STATUS_OK = 0,
  QS_STATUS_NULL_POINTER = 1,
  QS_STATUS_INVALID_ARGUMENT = 2,
  QS_STATUS_CAPACITY = 3,
  QS_STATUS_DEGENERATE = 4,
  QS_STATUS_SINGULAR = 5,
  QS_STATUS_UNNORMALIZABLE = 6,
  QS_STATUS_IO = 7,
  QS_STATUS_PANIC = 8,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum QsStatus QsStatus;
#else
typedef int32_t QsStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum QsBoundary
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  QS_BOUNDARY_OPEN = 0,
  QS_BOUNDARY_PERIODIC = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum QsBoundary QsBoundary;
#else
typedef int32_t QsBoundary;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque statevector handle.
 */
typedef struct QsState QsState;

typedef struct QsComplex {
  double re;
  double im;
} QsComplex;

/**
 * Kicked-Ising parameters. Angles are J·T, B_X·T and B_Z·T.
 */
typedef struct QsFloquetParams {
  size_t n_sites;
  double jt;
  double bxt;
  double bzt;
  QsBoundary boundary;
} QsFloquetParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qs_version(void);

/**
 * Message for the last failing call on this thread (empty after success).
 *
 * The pointer stays valid until the next `qs_*` call on the same thread.
 */
const char *qs_last_error_message(void);

/**
 * Allocates |0...0> on `n_qubits` qubits.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
QsStatus qs_state_new_zero(size_t n_qubits, struct QsState **out);

/**
 * Allocates a state from `len` amplitudes; `len` must be a power of two.
 *
 * # Safety
 * `amps` must point to `len` readable values and `out` to one writable handle.
 */
QsStatus qs_state_from_amplitudes(const struct QsComplex *amps, size_t len, struct QsState **out);

/**
 * Releases a state. Null is ignored.
 *
 * # Safety
 * `state` must come from a `qs_state_*` constructor and not be freed twice.
 */
void qs_state_free(struct QsState *state);

/**
 * Number of qubits, or 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t qs_state_n_qubits(const struct QsState *state);

/**
 * Copies the 2^n amplitudes into `out`, which must hold exactly `len` entries.
 *
 * # Safety
 * `state` must be a live handle and `out` must point to `len` writable values.
 */
QsStatus qs_state_copy_amplitudes(const struct QsState *state, struct QsComplex *out, size_t len);

/**
 * Applies `cycles` Floquet cycles (complex-conjugated gates when `conjugated`)
 * to qubits `offset..offset + n_sites` of the state.
 *
 * # Safety
 * `state` and `params` must be valid pointers.
 */
QsStatus qs_state_floquet_evolve(struct QsState *state,
                                 const struct QsFloquetParams *params,
                                 size_t cycles,
                                 bool conjugated,
                                 size_t offset);

/**
 * Applies the inverse of `cycles` Floquet cycles.
 *
 * # Safety
 * `state` and `params` must be valid pointers.
 */
QsStatus qs_state_floquet_evolve_inverse(struct QsState *state,
                                         const struct QsFloquetParams *params,
                                         size_t cycles,
                                         size_t offset);

/**
 * Exact P_EPR and F_EPR of the recovery protocol after `cycles` cycles.
 *
 * # Safety
 * `params`, `p_epr` and `f_epr` must be valid pointers.
 */
QsStatus qs_hpr_exact(const struct QsFloquetParams *params,
                      size_t n_a,
                      size_t n_d,
                      size_t cycles,
                      double *p_epr,
                      double *f_epr);

/**
 * Haar-random (P_EPR, F_EPR) for subsystem dimensions d_A and d_D.
 *
 * # Safety
 * `p_epr` and `f_epr` must be valid pointers.
 */
QsStatus qs_haar_baseline(uint64_t d_a, uint64_t d_d, double *p_epr, double *f_epr);

/**
 * Two-qubit gates of `cycles` cycles in the backward cone of the 1-based `seed_sites`.
 *
 * # Safety
 * `params` and `out` must be valid; `seed_sites` must point to `n_seed` values.
 */
QsStatus qs_lightcone_count(const struct QsFloquetParams *params,
                            size_t cycles,
                            const size_t *seed_sites,
                            size_t n_seed,
                            size_t *out);

/**
 * Exact OTOC on |0...0> for Pauli strings such as "Z1" and "X5" (1-based sites).
 *
 * # Safety
 * `params` and `out` must be valid; `o_a` and `o_d` must be NUL-terminated strings.
 */
QsStatus qs_otoc(const struct QsFloquetParams *params,
                 size_t cycles,
                 const char *o_a,
                 const char *o_d,
                 struct QsComplex *out);

/**
 * Global depolarizing fidelity f after `n_2q` entangling gates of angle `theta`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
QsStatus qs_depolarizing_f(double p,
                           double p_a,
                           double p_b,
                           double theta,
                           uint64_t n_2q,
                           double *out);

/**
 * Inverts the depolarizing model for measured P_EPR and F_EPR.
 *
 * # Safety
 * `p_mit` and `f_mit` must be valid pointers.
 */
QsStatus qs_mitigate_hpr(double p_noisy,
                         double f_noisy,
                         double f,
                         double d_a,
                         double d_d,
                         double *p_mit,
                         double *f_mit);

/**
 * Infinite-temperature energy and variance of the Heisenberg ring.
 *
 * # Safety
 * `e_inf` and `variance` must be valid pointers.
 */
QsStatus qs_xxx_moments(size_t n_sites, double coupling, double *e_inf, double *variance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSCRAMBLE_H */
