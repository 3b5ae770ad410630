/* C interface to the linerate line-network analyzer. */

#ifndef LINERATE_H
#define LINERATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every FFI call.
typedef enum LinerateStatus {
  // Success.
  LINERATE_STATUS_OK = 0,
  // A required pointer argument was null.
  LINERATE_STATUS_NULL_POINTER = 1,
  // Invalid configuration, settings or argument.
  LINERATE_STATUS_INVALID_ARGUMENT = 2,
  // An iteration failed to converge.
  LINERATE_STATUS_NON_CONVERGENCE = 3,
  // The request is structurally infeasible (state cap, zero throughput,
  // permanently full node, unreachable tail budget).
  LINERATE_STATUS_INFEASIBLE = 4,
  // The destination buffer is too small; the required length has been
  // written to the length out-parameter.
  LINERATE_STATUS_BUFFER_TOO_SMALL = 5,
  // Internal error; details via `linerate_last_error_message`.
  LINERATE_STATUS_INTERNAL = 6,
} LinerateStatus;

// Occupancy convention for delay computations.
typedef enum LinerateThetaMode {
  // Occupancy after the node's same-epoch departure (default).
  LINERATE_THETA_MODE_ARRIVAL = 0,
  // Raw time-stationary occupancy.
  LINERATE_THETA_MODE_STATIONARY = 1,
} LinerateThetaMode;

// Opaque network description.
typedef struct LinerateConfig LinerateConfig;

// Opaque delay distribution.
typedef struct LineratePmf LineratePmf;

// Opaque simulation report.
typedef struct LinerateSimReport LinerateSimReport;

// Opaque converged fixed-point solution.
typedef struct LinerateSolution LinerateSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the underlying library; static storage, do not free.
const char *linerate_version(void);

// Copies the calling thread's last error message (NUL terminated) into
// `buf` and returns the full length including the terminator. When `buf`
// is null or too small, only the required length is reported.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
size_t linerate_last_error_message(char *buf, size_t cap);

// Builds and validates a config from `n_erasures` link erasures and
// `n_buffers` buffer sizes.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_config_new(const double *erasures,
                                        size_t n_erasures,
                                        const uint32_t *buffers,
                                        size_t n_buffers,
                                        struct LinerateConfig **out);

// Parses the JSON document format (keys `hops`, `erasures`, `buffers`,
// optional `packet_size_bytes`).
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_config_from_json(const char *json, struct LinerateConfig **out);

// Serializes a config to its JSON document form. Two-call protocol: the
// required length (including NUL) is always written to `*len`; the text is
// copied only when `buf` is large enough.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_config_to_json(const struct LinerateConfig *config,
                                            char *buf,
                                            size_t cap,
                                            size_t *len);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_config_hops(const struct LinerateConfig *config, size_t *out);

// Joint state count, saturating at `UINT64_MAX`.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_config_state_count(const struct LinerateConfig *config, uint64_t *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
void linerate_config_free(struct LinerateConfig *config);

// Runs the fixed-point solver. Pass `tolerance <= 0` or
// `max_iterations == 0` to use the defaults (1e-10, 100000).
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_solve(const struct LinerateConfig *config,
                                   double tolerance,
                                   uint64_t max_iterations,
                                   struct LinerateSolution **out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_solution_capacity(const struct LinerateSolution *solution,
                                               double *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_solution_iterations(const struct LinerateSolution *solution,
                                                 uint64_t *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_solution_residual(const struct LinerateSolution *solution,
                                               double *out);

// Arrival rates r_1..r_h. Two-call protocol as in
// [`linerate_config_to_json`].
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_solution_arrival_rates(const struct LinerateSolution *solution,
                                                    double *buf,
                                                    size_t cap,
                                                    size_t *len);

// Blocking probabilities p_b1..p_bh (the last entry is 0).
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_solution_blocking_probs(const struct LinerateSolution *solution,
                                                     double *buf,
                                                     size_t cap,
                                                     size_t *len);

// Stationary occupancy PMF of intermediate node `node` (1-based).
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_solution_occupancy(const struct LinerateSolution *solution,
                                                size_t node,
                                                double *buf,
                                                size_t cap,
                                                size_t *len);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
void linerate_solution_free(struct LinerateSolution *solution);

// Exact joint-chain throughput; refuses chains larger than `state_cap`
// states (pass 0 for the default cap of 2^20).
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_exact_throughput(const struct LinerateConfig *config,
                                              size_t state_cap,
                                              double *out);

// Runs a seeded simulation. Pass `warmup = UINT64_MAX` for the default
// warmup of `max(10 * total buffer, 10^4)` epochs; `replications >= 2`
// pools independent replications.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_simulate(const struct LinerateConfig *config,
                                      uint64_t epochs,
                                      uint64_t warmup,
                                      uint64_t seed,
                                      uint32_t replications,
                                      struct LinerateSimReport **out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_sim_report_throughput(const struct LinerateSimReport *report,
                                                   double *out);

// Standard error across replications; NaN for a single replication.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_sim_report_stderr(const struct LinerateSimReport *report, double *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_sim_report_delivered(const struct LinerateSimReport *report,
                                                  uint64_t *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_sim_report_mean_delay(const struct LinerateSimReport *report,
                                                   double *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
void linerate_sim_report_free(struct LinerateSimReport *report);

// Analytic total-delay distribution for a solved network. Pass
// `tail_budget <= 0` for the default 1e-9.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_total_delay(const struct LinerateConfig *config,
                                         const struct LinerateSolution *solution,
                                         double tail_budget,
                                         enum LinerateThetaMode theta_mode,
                                         struct LineratePmf **out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_pmf_min_support(const struct LineratePmf *pmf, uint64_t *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_pmf_len(const struct LineratePmf *pmf, size_t *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_pmf_tail_mass(const struct LineratePmf *pmf, double *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_pmf_mean(const struct LineratePmf *pmf, double *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_pmf_variance(const struct LineratePmf *pmf, double *out);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_pmf_quantile(const struct LineratePmf *pmf, double q, uint64_t *out);

// Probability masses over `min_support..`. Two-call protocol.
//
// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
enum LinerateStatus linerate_pmf_masses(const struct LineratePmf *pmf,
                                        double *buf,
                                        size_t cap,
                                        size_t *len);

// # Safety
// Pointer arguments must be valid for their access or null (nulls are
// rejected with a status code); handles must have been created by this
// library and not yet freed.
void linerate_pmf_free(struct LineratePmf *pmf);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINERATE_H */
