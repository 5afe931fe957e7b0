#ifndef FPUT_H
#define FPUT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum FputStatus {
  FPUT_STATUS_OK = 0,
  FPUT_STATUS_NULL_POINTER = 1,
  FPUT_STATUS_INVALID_ARGUMENT = 2,
  FPUT_STATUS_DIMENSION_MISMATCH = 3,
  FPUT_STATUS_BLOW_UP = 4,
  FPUT_STATUS_NON_RESONANCE = 5,
  FPUT_STATUS_PRECONDITION = 6,
  FPUT_STATUS_DEGENERATE_DENOMINATOR = 7,
  FPUT_STATUS_IO = 8,
  FPUT_STATUS_INTERNAL = 9,
  FPUT_STATUS_PANIC = 10,
} FputStatus;

/**
 * A periodic chain together with its current state.
 */
typedef struct FputChain FputChain;

/**
 * Quartic sums of the current state (real parts).
 */
typedef struct FputQuarticSums {
  double s1;
  double s2;
  double s3;
} FputQuarticSums;

/**
 * Coefficient-sum totals for one `k1`.
 */
typedef struct FputBoundScan {
  double sum_b1;
  double sum_b2;
  double sum_b3;
  double total;
  double normalized;
} FputBoundScan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *fput_last_error_message(void);

/**
 * Static, nul-terminated name of a status code; unknown codes are named too.
 */
const char *fput_status_name(int32_t status);

/**
 * Library version, nul-terminated.
 */
const char *fput_version(void);

/**
 * Creates a chain at rest. Release with [`fput_chain_free`].
 *
 * # Safety
 * `out` must be null or point to writable storage for one pointer.
 */
enum FputStatus fput_chain_new(size_t n,
                               double m,
                               double kappa,
                               double beta,
                               struct FputChain **out);

/**
 * Releases a chain; null is ignored.
 *
 * # Safety
 * `chain` must be null or come from [`fput_chain_new`] and not be used afterwards.
 */
void fput_chain_free(struct FputChain *chain);

/**
 * Number of masses.
 *
 * # Safety
 * `chain` must be null or a live handle; `out` null or writable.
 */
enum FputStatus fput_chain_len(const struct FputChain *chain, size_t *out);

/**
 * Replaces positions, momenta and time. Both arrays have `len` entries.
 *
 * # Safety
 * `q` and `p` must point to `len` readable doubles.
 */
enum FputStatus fput_chain_set_state(struct FputChain *chain,
                                     const double *q,
                                     const double *p,
                                     size_t len,
                                     double t);

/**
 * Copies positions and momenta into caller buffers of `len` entries; `t` may be null.
 *
 * # Safety
 * `q` and `p` must point to `len` writable doubles.
 */
enum FputStatus fput_chain_get_state(const struct FputChain *chain,
                                     double *q,
                                     double *p,
                                     size_t len,
                                     double *t);

/**
 * Random-phase initial data: `kind` 0 is thermal, 1 out-of-equilibrium. Resets `t` to 0.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
enum FputStatus fput_chain_init_random_phase(struct FputChain *chain, uint32_t kind, uint64_t seed);

/**
 * Integrates to `t_max` with step `h` using the sixth-order scheme.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
enum FputStatus fput_chain_evolve(struct FputChain *chain, double h, double t_max);

/**
 * Total energy of the current state.
 *
 * # Safety
 * `chain` must be null or a live handle; `out` null or writable.
 */
enum FputStatus fput_chain_energy(const struct FputChain *chain, double *out);

/**
 * Resonant and non-resonant quartic sums of the current state.
 *
 * # Safety
 * `chain` must be null or a live handle; `out` null or writable.
 */
enum FputStatus fput_chain_quartic_sums(const struct FputChain *chain, struct FputQuarticSums *out);

/**
 * Sums of squared transformation coefficients over all quartets with this `k1`.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum FputStatus fput_scan_bound(size_t n,
                                double kappa,
                                double m,
                                size_t k1,
                                struct FputBoundScan *out);

/**
 * Wick second moment of the B1 sum for `b_k = √φ_k η_k`, Gaussian `η`.
 *
 * `phi` holds `φ_1..φ_{N-1}`, so `len = N - 1`.
 *
 * # Safety
 * `phi` must point to `len` readable doubles; `out` null or writable.
 */
enum FputStatus fput_wick_moment(size_t k1,
                                 const double *phi,
                                 size_t len,
                                 double kappa,
                                 double m,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPUT_H */
