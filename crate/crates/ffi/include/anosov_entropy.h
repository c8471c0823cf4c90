#ifndef ANOSOV_ENTROPY_H
#define ANOSOV_ENTROPY_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum AeStatus {
  AE_STATUS_OK = 0,
  AE_STATUS_NULL_POINTER = 1,
  AE_STATUS_DOMAIN = 2,
  AE_STATUS_INVALID_STATE = 3,
  AE_STATUS_DIMENSION_MISMATCH = 4,
  AE_STATUS_MODE_OUT_OF_RANGE = 5,
  AE_STATUS_DYNAMICS_OVERFLOW = 6,
  AE_STATUS_NOT_PERIODIC = 7,
  AE_STATUS_NOT_TIME_INDEPENDENT = 8,
  AE_STATUS_EIGEN = 9,
  AE_STATUS_NOT_ASYMPTOTIC = 10,
  AE_STATUS_HORIZON_CAP = 11,
  AE_STATUS_BUFFER_TOO_SMALL = 12,
  AE_STATUS_PANIC = 13,
} AeStatus;

typedef enum AeRegime {
  AE_REGIME_UNSTABLE = 0,
  AE_REGIME_STABLE = 1,
} AeRegime;

/**
 * Opaque quadratic model.
 */
typedef struct AeModel AeModel;

/**
 * Opaque sampled entropy series.
 */
typedef struct AeSeries AeSeries;

/**
 * Opaque Gaussian state.
 */
typedef struct AeState AeState;

/**
 * Damped-oscillator bath parameters.
 */
typedef struct AeQbmeParams {
  double omega;
  double k;
  double n_bar;
  double nu0;
  double r0;
  double phi0;
} AeQbmeParams;

/**
 * Options for `ae_compare_rate`. Fill with `ae_compare_options_default`.
 */
typedef struct AeCompareOptions {
  double t_max;
  double step;
  size_t reduced_mode;
  double tail_fraction;
  double horizon_cap;
  double max_norm;
} AeCompareOptions;

/**
 * Result of `ae_compare_rate`. Optional quantities are NaN when absent.
 */
typedef struct AeRateReport {
  enum AeRegime regime;
  double lyapunov;
  double fitted_slope;
  double intercept;
  double half_log_c20;
  double relative_error;
  double t_max_used;
  double max_defect;
  size_t window_start;
  size_t window_end;
  size_t n_samples;
} AeRateReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ae_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ae_version(void);

enum AeStatus ae_state_vacuum(size_t n_modes, struct AeState **out_state);

/**
 * Displaced squeezed thermal mode with occupation `nu`, squeezing `r` at
 * angle `phi` and displacement `alpha_re + i alpha_im`.
 */
enum AeStatus ae_state_single_mode(double nu,
                                   double r,
                                   double phi,
                                   double alpha_re,
                                   double alpha_im,
                                   struct AeState **out_state);

/**
 * State from a mean of length `2 n_modes` and a row-major covariance of
 * `(2 n_modes)^2` entries.
 */
enum AeStatus ae_state_new(size_t n_modes,
                           const double *mean,
                           const double *cov,
                           struct AeState **out_state);

enum AeStatus ae_state_product(const struct AeState *const *states,
                               size_t count,
                               struct AeState **out_state);

/**
 * Marginal of mode `mode` as a new one-mode state.
 */
enum AeStatus ae_state_reduce(const struct AeState *state, size_t mode, struct AeState **out_state);

enum AeStatus ae_state_n_modes(const struct AeState *state, size_t *out_n);

/**
 * Copies the mean into `dst`, which must hold `2 n_modes` values.
 */
enum AeStatus ae_state_mean(const struct AeState *state, double *dst, size_t len);

/**
 * Copies the row-major covariance into `dst`, which must hold
 * `(2 n_modes)^2` values.
 */
enum AeStatus ae_state_cov(const struct AeState *state, double *dst, size_t len);

/**
 * Symplectic eigenvalues in ascending order, `n_modes` values.
 */
enum AeStatus ae_state_symplectic_eigenvalues(const struct AeState *state, double *dst, size_t len);

/**
 * Determinant of a one-mode covariance.
 */
enum AeStatus ae_state_determinant(const struct AeState *state, double *out_det);

/**
 * Applies `Z(t, 0)` of `model` to `state`.
 */
enum AeStatus ae_state_evolve(const struct AeState *state,
                              const struct AeModel *model,
                              double t,
                              double step,
                              struct AeState **out_state);

void ae_state_free(struct AeState *state);

enum AeStatus ae_entropy_from_nu(double nu, double *out_entropy);

enum AeStatus ae_entropy_from_determinant(double det, double *out_entropy);

enum AeStatus ae_model_ihe(double omega1_sq,
                           double lambda_sq,
                           double coupling,
                           struct AeModel **out_model);

enum AeStatus ae_model_coupled_parametric(double omega1_sq,
                                          double omega2_sq,
                                          double q,
                                          double g,
                                          struct AeModel **out_model);

enum AeStatus ae_model_single_parametric(double alpha, double q, struct AeModel **out_model);

/**
 * Periodic stiffness `K0 + sum_k C_k cos(2 pi k t / T) + S_k sin(2 pi k t / T)`.
 * `constant` holds `n_modes^2` values; `cos_terms` and `sin_terms` hold
 * `n_harmonics` such matrices back to back.
 */
enum AeStatus ae_model_custom_periodic(size_t n_modes,
                                       double period,
                                       const double *constant,
                                       size_t n_harmonics,
                                       const double *cos_terms,
                                       const double *sin_terms,
                                       struct AeModel **out_model);

enum AeStatus ae_model_n_modes(const struct AeModel *model, size_t *out_n);

/**
 * Fails with `AE_STATUS_NOT_PERIODIC` for time-independent models.
 */
enum AeStatus ae_model_period(const struct AeModel *model, double *out_period);

/**
 * Upper Lyapunov exponent: largest real part of the generator spectrum
 * for constant models, largest `ln|rho| / T` of the monodromy otherwise.
 */
enum AeStatus ae_model_lyapunov(const struct AeModel *model, double step, double *out_lyapunov);

/**
 * Row-major `Z(t1, t0)` into `dst` (`(2 n_modes)^2` values) and its
 * symplectic defect into `out_defect` (may be null).
 */
enum AeStatus ae_model_propagate(const struct AeModel *model,
                                 double t0,
                                 double t1,
                                 double step,
                                 double *dst,
                                 size_t len,
                                 double *out_defect);

void ae_model_free(struct AeModel *model);

/**
 * Characteristic exponent of `x'' + (alpha - 2 q cos 2t) x = 0`.
 */
enum AeStatus ae_mathieu_exponent(double alpha,
                                  double q,
                                  double step,
                                  double *out_re,
                                  double *out_im);

/**
 * Growth rate of the coupled parametric model from its normal modes.
 */
enum AeStatus ae_coupled_lyapunov(const struct AeModel *model, double step, double *out_lyapunov);

enum AeStatus ae_qbme_nu(const struct AeQbmeParams *params, double t, double *out_nu);

enum AeStatus ae_compare_options_default(double t_max, double step, struct AeCompareOptions *opts);

/**
 * Reduced determinant and entropy of mode `reduced_mode` sampled on the
 * model's default grid up to `t_max`.
 */
enum AeStatus ae_determinant_series(const struct AeModel *model,
                                    const struct AeState *state,
                                    double t_max,
                                    double step,
                                    size_t reduced_mode,
                                    struct AeSeries **out_series);

enum AeStatus ae_series_len(const struct AeSeries *series, size_t *out_len);

/**
 * Copies times, determinants and entropies; each buffer holds `len`
 * values and any of them may be null to skip it.
 */
enum AeStatus ae_series_copy(const struct AeSeries *series,
                             double *times,
                             double *det,
                             double *entropy,
                             size_t len);

void ae_series_free(struct AeSeries *series);

/**
 * Fits the asymptotic entropy rate and compares it with the upper
 * Lyapunov exponent. When `out_series` is non-null it receives the
 * series the fit used.
 */
enum AeStatus ae_compare_rate(const struct AeModel *model,
                              const struct AeState *state,
                              const struct AeCompareOptions *opts,
                              struct AeRateReport *out_report,
                              struct AeSeries **out_series);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANOSOV_ENTROPY_H */
