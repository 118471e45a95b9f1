#ifndef GKP_REPEATER_H
#define GKP_REPEATER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all functions.
 */
typedef enum GkpStatus {
  GkpStatus_Ok = 0,
  GkpStatus_NullPointer = 1,
  GkpStatus_Domain = 2,
  GkpStatus_Config = 3,
  GkpStatus_PrecisionExhausted = 4,
  GkpStatus_BudgetExceeded = 5,
  GkpStatus_Infeasible = 6,
  GkpStatus_Internal = 7,
} GkpStatus;

typedef enum GkpCode {
  GkpCode_C4 = 0,
  GkpCode_Steane7 = 1,
} GkpCode;

typedef enum GkpScheme {
  GkpScheme_GkpOnly = 0,
  GkpScheme_C4 = 1,
  GkpScheme_Steane7 = 2,
} GkpScheme;

/**
 * Opaque precomputed chain: schedule, coefficients and noise model.
 */
typedef struct GkpChain GkpChain;

/**
 * Outcome of an adaptive Monte-Carlo estimate over a chain of links.
 */
typedef struct GkpEstimate {
  double p_err_x;
  double p_err_z;
  double se_x;
  double se_z;
  uint64_t trials;
  bool converged;
} GkpEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null; do not free.
 */
const char *gkp_status_message(enum GkpStatus status);

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
uintptr_t gkp_last_error_message(char *buf, uintptr_t len);

/**
 * Repeaterless key capacity of a pure-loss fibre (bits per mode); +inf at 0 km.
 */
double gkp_plob(double length_km);

/**
 * Probability that a Gaussian shift of std `sigma` is corrected to a logical flip.
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum GkpStatus gkp_flip_prob(double sigma, double *out);

/**
 * Flip likelihood given the measured syndrome `x0` ∈ [−√π/2, √π/2).
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum GkpStatus gkp_error_likelihood(double sigma, double x0, double *out);

/**
 * Squeezing in dB for a GKP noise standard deviation.
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum GkpStatus gkp_squeezing_db(double sigma, double *out);

/**
 * Six-state key fraction with advantage distillation for Bell-diagonal coefficients.
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum GkpStatus gkp_ad_key_rate(double p00, double p01, double p10, double p11, double *out);

/**
 * Key fraction for independent end-to-end X and Z flip probabilities.
 */
double gkp_key_rate_from_flips(double q_x, double q_z);

/**
 * Largest distance (km) at which a GKP-only chain keeps key per mode above
 * `threshold`, with the station spacing optimised.
 *
 * # Safety
 * `out_km` must be null or a valid pointer.
 */
enum GkpStatus gkp_analytic_distance(double eta0, double sigma, double threshold, double *out_km);

/**
 * Storage cost of a type-B and a type-A station for `code`.
 *
 * # Safety
 * Out-pointers must be null or valid.
 */
enum GkpStatus gkp_station_cost(enum GkpCode code, uint32_t *out_type_b, uint32_t *out_type_a);

/**
 * Build a chain plan. On success `*out` owns a handle to release with
 * [`gkp_chain_free`].
 *
 * # Safety
 * `out` must be null or a valid pointer.
 */
enum GkpStatus gkp_chain_new(double eta0,
                             double sigma_gkp,
                             enum GkpScheme scheme,
                             uint32_t n_multi,
                             uint32_t n_all,
                             bool analog,
                             uint32_t digits,
                             struct GkpChain **out);

/**
 * Release a handle from [`gkp_chain_new`]. Null is ignored.
 *
 * # Safety
 * `chain` must be null or a handle not yet freed.
 */
void gkp_chain_free(struct GkpChain *chain);

/**
 * Run the single trial with stream `(seed, index)`.
 *
 * # Safety
 * `chain` must be a live handle; out-pointers null or valid.
 */
enum GkpStatus gkp_chain_trial(const struct GkpChain *chain,
                               uint64_t seed,
                               uint64_t index,
                               bool *out_flip_x,
                               bool *out_flip_z);

/**
 * Adaptive estimate of the logical flip probabilities over the chain.
 * Returns `BudgetExceeded` (with `*out` filled and `converged = false`) when
 * the budget stops the sampling first.
 *
 * # Safety
 * `chain` must be a live handle; `out` null or valid.
 */
enum GkpStatus gkp_chain_estimate(const struct GkpChain *chain,
                                  double threshold,
                                  uint64_t seed,
                                  uint64_t budget,
                                  struct GkpEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GKP_REPEATER_H */
