#ifndef GKDV_H
#define GKDV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GkdvStatus {
  GKDV_STATUS_OK = 0,
  GKDV_STATUS_NULL_POINTER = 1,
  GKDV_STATUS_INVALID_ARGUMENT = 2,
  GKDV_STATUS_BLOW_UP = 3,
  GKDV_STATUS_BUDGET_EXCEEDED = 4,
  GKDV_STATUS_OVERFLOW = 5,
  GKDV_STATUS_NON_FINITE = 6,
  GKDV_STATUS_PANIC = 7,
  GKDV_STATUS_OTHER = 8,
} GkdvStatus;

/**
 * Mean-zero real field stored by its modes c_1..c_N.
 */
typedef struct GkdvField GkdvField;

/**
 * Polynomial nonlinearity P(u) = Σ a_j u^{d_j}.
 */
typedef struct GkdvPoly GkdvPoly;

/**
 * Sampled solution of a run.
 */
typedef struct GkdvTrajectory GkdvTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes, into `buf`. Returns the buffer size needed for
 * the full message. `buf` may be null to query the size.
 *
 * # Safety
 * `buf` must be null or valid for `len` writable bytes.
 */
size_t gkdv_last_error(char *buf, size_t len);

/**
 * Builds a field from `n` positive modes `c_k = re[k-1] + i im[k-1]`.
 *
 * # Safety
 * `re` and `im` must each point to `n` readable doubles; `out` must be
 * writable.
 */
enum GkdvStatus gkdv_field_from_modes(const double *re,
                                      const double *im,
                                      size_t n,
                                      struct GkdvField **out);

/**
 * `c_k = ⟨k⟩^{-s-1/2-δ} e^{iθ_k}` with phases from a seeded stream.
 *
 * # Safety
 * `out` must be writable.
 */
enum GkdvStatus gkdv_field_random_sobolev(double s,
                                          size_t cutoff,
                                          uint64_t seed,
                                          double delta,
                                          struct GkdvField **out);

/**
 * # Safety
 * `f` must be null or a handle from this library not yet freed.
 */
void gkdv_field_free(struct GkdvField *f);

/**
 * Mode cutoff N, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t gkdv_field_cutoff(const struct GkdvField *f);

/**
 * The k-th coefficient for any integer k; zero outside the band.
 *
 * # Safety
 * `f` must be a live handle; `re` and `im` writable.
 */
enum GkdvStatus gkdv_field_coeff(const struct GkdvField *f, int64_t k, double *re, double *im);

/**
 * `(Σ_{k≠0} ⟨k⟩^{2s} |c_k|²)^{1/2}`.
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum GkdvStatus gkdv_field_sobolev_norm(const struct GkdvField *f, double s, double *out);

/**
 * Airy evolution `c_k ↦ c_k e^{ik³t}` into a new handle.
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum GkdvStatus gkdv_field_free_flow(const struct GkdvField *f, double t, struct GkdvField **out);

/**
 * Translation `u(x) ↦ u(x + h)` into a new handle.
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum GkdvStatus gkdv_field_translate(const struct GkdvField *f, double h, struct GkdvField **out);

/**
 * `P(u) = Σ coeffs[j] u^{degrees[j]}`; degrees at least 2 and strictly
 * increasing. `n = 0` gives P ≡ 0.
 *
 * # Safety
 * `coeffs` and `degrees` must each point to `n` readable values; `out`
 * writable.
 */
enum GkdvStatus gkdv_poly_new(const double *coeffs,
                              const uint32_t *degrees,
                              size_t n,
                              struct GkdvPoly **out);

/**
 * # Safety
 * `p` must be null or a live handle.
 */
void gkdv_poly_free(struct GkdvPoly *p);

/**
 * Integrates `u_t + u_xxx = ∂_x P(u)` (or its gauged form when `gauged`)
 * with Lawson RK4, sampling every `sample_every` steps and at the end.
 * A tripped blow-up guard returns `GKDV_STATUS_BLOW_UP`.
 *
 * # Safety
 * `f` and `p` must be live handles; `out` writable.
 */
enum GkdvStatus gkdv_simulate(const struct GkdvField *f,
                              const struct GkdvPoly *p,
                              size_t cutoff,
                              double dt,
                              double horizon,
                              size_t sample_every,
                              bool gauged,
                              struct GkdvTrajectory **out);

/**
 * # Safety
 * `t` must be null or a live handle.
 */
void gkdv_trajectory_free(struct GkdvTrajectory *t);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t gkdv_trajectory_len(const struct GkdvTrajectory *t);

/**
 * Time and gauge phase of sample `i`.
 *
 * # Safety
 * `t` must be a live handle; `time` and `phase` writable.
 */
enum GkdvStatus gkdv_trajectory_sample(const struct GkdvTrajectory *t,
                                       size_t i,
                                       double *time,
                                       double *phase);

/**
 * Copy of the state at sample `i` as a new field handle.
 *
 * # Safety
 * `t` must be a live handle; `out` writable.
 */
enum GkdvStatus gkdv_trajectory_state(const struct GkdvTrajectory *t,
                                      size_t i,
                                      struct GkdvField **out);

/**
 * `(Σ k_j)³ − Σ k_j³`; overflow of a 64-bit result is reported.
 *
 * # Safety
 * `k` must point to `n` readable values; `out` writable.
 */
enum GkdvStatus gkdv_h_n(const int64_t *k, size_t n, int64_t *out);

/**
 * Exhaustive case check over `0 < |k_j| ≤ k_max`. A nonpositive `c_c`
 * selects the default 1/(2n).
 *
 * # Safety
 * `tuples` and `violations` must be writable.
 */
enum GkdvStatus gkdv_verify_cases(size_t n,
                                  int64_t k_max,
                                  double c_a,
                                  double c_c,
                                  double c_d,
                                  double c_hl,
                                  uint64_t *tuples,
                                  uint64_t *violations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GKDV_H */
