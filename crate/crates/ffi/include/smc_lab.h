#ifndef SMC_LAB_H
#define SMC_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How a simulation ended.
 */
typedef enum SmcRunStatus {
  SMC_RUN_STATUS_COMPLETED = 0,
  SMC_RUN_STATUS_DIVERGED = 1,
  SMC_RUN_STATUS_SINGULAR_GAIN = 2,
  SMC_RUN_STATUS_STEP_UNDERFLOW = 3,
} SmcRunStatus;

/**
 * Result code of every fallible call.
 */
typedef enum SmcStatus {
  SMC_STATUS_OK = 0,
  SMC_STATUS_NULL_POINTER = 1,
  SMC_STATUS_INVALID_ARGUMENT = 2,
  SMC_STATUS_SINGULAR_GAIN = 3,
  SMC_STATUS_UNCONTROLLABLE = 4,
  SMC_STATUS_SINGULAR_DESIGN = 5,
  SMC_STATUS_CONFIG = 6,
  SMC_STATUS_IO = 7,
  SMC_STATUS_OUT_OF_RANGE = 8,
  SMC_STATUS_PANIC = 9,
} SmcStatus;

/**
 * Opaque scenario handle.
 */
typedef struct SmcScenario SmcScenario;

/**
 * Opaque trajectory handle.
 */
typedef struct SmcTrajectory SmcTrajectory;

typedef struct SmcCraneParams {
  double cart_mass;
  double payload_mass;
  double rope_length;
  double gravity;
  double x_d;
} SmcCraneParams;

typedef struct SmcIhssmcParams {
  double c1;
  double c2;
  double c3;
  double eta;
  double k;
  double x_d;
  double boundary_layer;
} SmcIhssmcParams;

typedef struct SmcAhssmcParams {
  double c1;
  double c2;
  double alpha1;
  double alpha2;
  double eta;
  double k;
  double x_d;
  double boundary_layer;
} SmcAhssmcParams;

typedef struct SmcIntegratorConfig {
  double rtol;
  double atol;
  double h_init;
  double h_min;
  double h_max;
  double t_end;
  double diverge_norm;
} SmcIntegratorConfig;

typedef struct SmcState {
  double x1;
  double x2;
  double x3;
  double x4;
} SmcState;

typedef struct SmcPlantTerms {
  double f1;
  double b1;
  double f2;
  double b2;
} SmcPlantTerms;

typedef struct SmcSurfaceDesign {
  double c1;
  double c2;
  double alpha1;
} SmcSurfaceDesign;

typedef struct SmcComplex {
  double re;
  double im;
} SmcComplex;

/**
 * One recorded sample. Surface fields are NaN when `has_surfaces` is 0.
 */
typedef struct SmcSample {
  double t;
  struct SmcState state;
  double u;
  double s1;
  double s2;
  double s3;
  uint8_t has_surfaces;
} SmcSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *smc_last_error_message(void);

/**
 * Static, nul-terminated library version.
 */
const char *smc_version(void);

struct SmcCraneParams smc_crane_params_default(void);

struct SmcIhssmcParams smc_ihssmc_params_default(void);

struct SmcAhssmcParams smc_ahssmc_params_default(void);

struct SmcIntegratorConfig smc_integrator_config_default(void);

/**
 * Drift and input-gain terms of the crane at `state`.
 */
enum SmcStatus smc_crane_terms(const struct SmcState *state,
                               const struct SmcCraneParams *params,
                               struct SmcPlantTerms *terms_out);

enum SmcStatus smc_crane_derivative(const struct SmcState *state,
                                    double u,
                                    const struct SmcCraneParams *params,
                                    struct SmcState *derivative_out);

/**
 * Incremental hierarchical sliding-mode input for the crane at `state`.
 */
enum SmcStatus smc_ihssmc_control(const struct SmcState *state,
                                  const struct SmcIhssmcParams *gains,
                                  const struct SmcCraneParams *params,
                                  double *u_out);

/**
 * Aggregated hierarchical sliding-mode input for the crane at `state`.
 */
enum SmcStatus smc_ahssmc_control(const struct SmcState *state,
                                  const struct SmcAhssmcParams *gains,
                                  const struct SmcCraneParams *params,
                                  double *u_out);

/**
 * Surface parameters giving the sliding dynamics the characteristic
 * polynomial `s^3 + d1 s^2 + d2 s + d3`.
 */
enum SmcStatus smc_solve_surface_params(const struct SmcCraneParams *params,
                                        double d1,
                                        double d2,
                                        double d3,
                                        struct SmcSurfaceDesign *design_out);

/**
 * Writes the three eigenvalues of the linearized sliding dynamics,
 * ascending by real part.
 */
enum SmcStatus smc_sliding_eigenvalues(const struct SmcCraneParams *params,
                                       double c1,
                                       double c2,
                                       double alpha1,
                                       struct SmcComplex *eigenvalues_out);

/**
 * State-feedback gain placing the poles of the linearized crane.
 * `poles` holds four entries; complex poles must come in conjugate pairs.
 */
enum SmcStatus smc_crane_ackermann(const struct SmcCraneParams *params,
                                   const struct SmcComplex *poles,
                                   uintptr_t n_poles,
                                   double *gain_out);

/**
 * Creates a handle for a builtin scenario by name.
 */
enum SmcStatus smc_scenario_builtin(const char *name, struct SmcScenario **scenario_out);

/**
 * Parses a scenario from the `key = value` configuration text.
 */
enum SmcStatus smc_scenario_from_config(const char *text, struct SmcScenario **scenario_out);

enum SmcStatus smc_scenario_get_integrator(const struct SmcScenario *scenario,
                                           struct SmcIntegratorConfig *config_out);

enum SmcStatus smc_scenario_set_integrator(struct SmcScenario *scenario,
                                           const struct SmcIntegratorConfig *config);

enum SmcStatus smc_scenario_set_initial_state(struct SmcScenario *scenario,
                                              const struct SmcState *y0);

/**
 * Releases a scenario handle. Null is ignored.
 */
void smc_scenario_free(struct SmcScenario *scenario);

/**
 * Integrates the scenario. Divergence, singular gains and step underflow
 * are reported through [`smc_trajectory_status`], not the return code.
 */
enum SmcStatus smc_scenario_run(const struct SmcScenario *scenario,
                                struct SmcTrajectory **trajectory_out);

/**
 * Number of recorded samples; zero for a null handle.
 */
uintptr_t smc_trajectory_len(const struct SmcTrajectory *trajectory);

enum SmcStatus smc_trajectory_sample(const struct SmcTrajectory *trajectory,
                                     uintptr_t index,
                                     struct SmcSample *sample_out);

/**
 * Terminal status and, unless completed, the time it was reached
 * (`NaN` for a completed run).
 */
enum SmcStatus smc_trajectory_status(const struct SmcTrajectory *trajectory,
                                     enum SmcRunStatus *status_out,
                                     double *time_out);

/**
 * Writes the trajectory CSV to `path`.
 */
enum SmcStatus smc_trajectory_export_csv(const struct SmcTrajectory *trajectory, const char *path);

/**
 * Releases a trajectory handle. Null is ignored.
 */
void smc_trajectory_free(struct SmcTrajectory *trajectory);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMC_LAB_H */
