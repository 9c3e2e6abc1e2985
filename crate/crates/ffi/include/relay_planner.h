#ifndef RELAY_PLANNER_H
#define RELAY_PLANNER_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
enum RpStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  /**
   * An argument is outside its domain.
   */
  RP_STATUS_DOMAIN = 2,
  /**
   * A fitted model has parameters outside their admissible ranges.
   */
  RP_STATUS_VALIDATION = 3,
  /**
   * A numerical procedure failed: boundary minimizer, band truncation,
   * rank deficiency, fit failure or a missing bracket.
   */
  RP_STATUS_NUMERIC = 4,
  /**
   * Inconsistent inputs, such as a model fitted for another SNR.
   */
  RP_STATUS_CONFIG = 5,
  /**
   * The caller's buffer is too short.
   */
  RP_STATUS_BUFFER_TOO_SMALL = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  RP_STATUS_PANIC = 7,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum RpStatus RpStatus;
#else
typedef int32_t RpStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Placement case of a link.
 */
enum RpCase
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  RP_CASE_DIRECT_CONCAVE = 0,
  RP_CASE_DIRECT_MIXED = 1,
  RP_CASE_RELAY_OPTIMAL = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum RpCase RpCase;
#else
typedef int32_t RpCase;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Channel and hardware constants.
 */
typedef struct RpEnvironment RpEnvironment;

/**
 * Memoized numerical link budget. Safe to share across threads.
 */
typedef struct RpExactModel RpExactModel;

/**
 * Fitted bandwidth and power laws for one target SNR.
 */
typedef struct RpModel RpModel;

/**
 * Relay plan produced by [`rp_plan_link`].
 */
typedef struct RpPlan RpPlan;

/**
 * Link description. `packet_bits` and `alpha` default to 2048 and 1.
 */
typedef struct RpLinkSpec {
  double l_km;
  double snr0_db;
  double p_r_w;
  uint64_t packet_bits;
  double alpha;
} RpLinkSpec;

typedef struct RpHopBudget {
  double f0_khz;
  double f_lo_khz;
  double f_hi_khz;
  double width_khz;
  /**
   * Required acoustic power at 0 dB SNR, in µPa².
   */
  double acoustic_power_unit_snr;
} RpHopBudget;

typedef struct RpModelParams {
  double omega;
  double lambda;
  double psi;
  double gamma;
  double delta;
  double snr0_db;
} RpModelParams;

typedef struct RpPlanSummary {
  uint64_t hop_count;
  double hop_length_km;
  double total_energy_joule;
  double total_delay_sec;
  double open_distance_km;
} RpPlanSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call on the same thread.
 */
const char *rp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rp_version(void);

/**
 * Link spec with the default packet size and spreading-loss alpha.
 */
struct RpLinkSpec rp_link_spec_default(double l_km, double snr0_db, double p_r_w);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
RpStatus rp_environment_new(double k,
                            double s,
                            double w,
                            double c,
                            double eta,
                            struct RpEnvironment **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
RpStatus rp_environment_default(struct RpEnvironment **out);

/**
 * # Safety
 * `env` must be NULL or a handle from `rp_environment_*`, freed once.
 */
void rp_environment_free(struct RpEnvironment *env);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
RpStatus rp_absorption_db_per_km(double f_khz, double *out);

/**
 * # Safety
 * `env` and `out` must be valid pointers.
 */
RpStatus rp_attenuation_noise_product_db(const struct RpEnvironment *env,
                                         double l_km,
                                         double f_khz,
                                         double *out);

/**
 * Optimal frequency, 3-dB band and required power for one hop.
 *
 * # Safety
 * `env` and `out` must be valid pointers.
 */
RpStatus rp_hop_budget(const struct RpEnvironment *env, double l_km, struct RpHopBudget *out);

/**
 * Electrical transmit power in watts needed to reach `snr0_db` over `l_km`.
 *
 * # Safety
 * `env` and `out` must be valid pointers.
 */
RpStatus rp_transmit_power_w(const struct RpEnvironment *env,
                             double l_km,
                             double snr0_db,
                             double *out);

/**
 * Model with the published fit parameters.
 *
 * # Safety
 * `env` and `out` must be valid pointers.
 */
RpStatus rp_model_published(const struct RpEnvironment *env, double snr0_db, struct RpModel **out);

/**
 * Fits a model to the numerical link budget. When `distances` is NULL the
 * default log-spaced grid over 1..100 km is used. Range violations are
 * reported as `Validation` and no handle is returned.
 *
 * # Safety
 * `env` and `out` must be valid pointers; `distances` must be NULL or point
 * to `count` values.
 */
RpStatus rp_model_fit(const struct RpEnvironment *env,
                      double snr0_db,
                      const double *distances,
                      size_t count,
                      struct RpModel **out);

/**
 * Model from explicit parameters.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
RpStatus rp_model_from_params(const struct RpModelParams *params, struct RpModel **out);

/**
 * # Safety
 * `model` and `out` must be valid pointers.
 */
RpStatus rp_model_params(const struct RpModel *model, struct RpModelParams *out);

/**
 * # Safety
 * `model` must be NULL or a handle from `rp_model_*`, freed once.
 */
void rp_model_free(struct RpModel *model);

/**
 * Distance above which one midpoint relay saves energy.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
RpStatus rp_open_distance(const struct RpModel *model, double p_r_w, double *out);

/**
 * # Safety
 * `model`, `t1_km` and `t2_km` must be valid pointers.
 */
RpStatus rp_thresholds(const struct RpModel *model, double p_r_w, double *t1_km, double *t2_km);

/**
 * # Safety
 * `model` and `out` must be valid pointers.
 */
RpStatus rp_classify(const struct RpModel *model, double l_km, double p_r_w, RpCase *out);

/**
 * Energy in joules to send one packet directly.
 *
 * # Safety
 * `model`, `spec` and `out` must be valid pointers.
 */
RpStatus rp_direct_energy(const struct RpModel *model, const struct RpLinkSpec *spec, double *out);

/**
 * Energy in joules with one relay at `x_km`, strictly inside the link.
 *
 * # Safety
 * `model`, `spec` and `out` must be valid pointers.
 */
RpStatus rp_relay_energy(const struct RpModel *model,
                         const struct RpLinkSpec *spec,
                         double x_km,
                         double *out);

/**
 * # Safety
 * `model`, `env`, `spec` and `out` must be valid pointers.
 */
RpStatus rp_direct_delay(const struct RpModel *model,
                         const struct RpEnvironment *env,
                         const struct RpLinkSpec *spec,
                         double *out);

/**
 * # Safety
 * `model`, `env`, `spec` and `out` must be valid pointers.
 */
RpStatus rp_relay_delay(const struct RpModel *model,
                        const struct RpEnvironment *env,
                        const struct RpLinkSpec *spec,
                        double x_km,
                        double *out);

/**
 * Equal-hop relay plan for the link.
 *
 * # Safety
 * `model`, `env`, `spec` and `out` must be valid pointers.
 */
RpStatus rp_plan_link(const struct RpModel *model,
                      const struct RpEnvironment *env,
                      const struct RpLinkSpec *spec,
                      struct RpPlan **out);

/**
 * # Safety
 * `plan` and `out` must be valid pointers.
 */
RpStatus rp_plan_summary(const struct RpPlan *plan, struct RpPlanSummary *out);

/**
 * Copies relay positions (km from the source) into `buf`. `written`
 * always receives the number of relays; if `capacity` is too small nothing
 * is copied and `BufferTooSmall` is returned. `buf` may be NULL when
 * `capacity` is 0.
 *
 * # Safety
 * `plan` and `written` must be valid pointers; `buf` must hold `capacity`
 * values.
 */
RpStatus rp_plan_relay_positions(const struct RpPlan *plan,
                                 double *buf,
                                 size_t capacity,
                                 size_t *written);

/**
 * # Safety
 * `plan` must be NULL or a handle from `rp_plan_link`, freed once.
 */
void rp_plan_free(struct RpPlan *plan);

/**
 * # Safety
 * `env` and `out` must be valid pointers.
 */
RpStatus rp_exact_model_new(const struct RpEnvironment *env, struct RpExactModel **out);

/**
 * Energy with the numerical link budget; `x_km` of 0 or `l_km` means direct.
 *
 * # Safety
 * `model`, `spec` and `out` must be valid pointers.
 */
RpStatus rp_exact_energy(const struct RpExactModel *model,
                         const struct RpLinkSpec *spec,
                         double x_km,
                         double *out);

/**
 * Grid minimizer of the numerical energy over relay positions. A
 * non-positive `step_km` selects the default of `l_km / 400`.
 *
 * # Safety
 * `model`, `spec`, `best_x_km` and `best_energy_joule` must be valid pointers.
 */
RpStatus rp_exact_argmin(const struct RpExactModel *model,
                         const struct RpLinkSpec *spec,
                         double step_km,
                         double *best_x_km,
                         double *best_energy_joule);

/**
 * Turning point of the numerical model: the shortest link on a
 * `0, l_step_km, ..., l_max_km` grid where a relay saves energy.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
RpStatus rp_exact_open_distance(const struct RpExactModel *model,
                                double snr0_db,
                                double p_r_w,
                                double l_step_km,
                                double l_max_km,
                                double x_step_km,
                                double *out);

/**
 * # Safety
 * `model` must be NULL or a handle from `rp_exact_model_new`, freed once.
 */
void rp_exact_model_free(struct RpExactModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELAY_PLANNER_H */
