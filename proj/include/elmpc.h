/*
 * Copyright 2026 the elmpc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* elmpc -- identification of nonlinear MIMO dynamics with extreme learning
 * machines, and constrained reference tracking with successive-linearization
 * model predictive control.
 *
 * This header is the complete public interface of the shared library.  All
 * functions return an elmpc_status; every out-parameter is only valid when
 * the return value is ELMPC_OK.  Objects are opaque handles created and
 * destroyed by the library.  Matrix arguments are dense row-major double
 * arrays unless stated otherwise.
 *
 * Thread safety: a trained model is immutable and may be shared across
 * threads (the extrapolation counter is atomic).  Controller, plant and
 * generator handles are single-threaded objects.  elmpc_last_error() is
 * thread-local.
 */

#ifndef ELMPC_H
#define ELMPC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define ELMPC_VERSION "0.1.0"

typedef enum elmpc_status {
  ELMPC_OK = 0,
  ELMPC_ERR_NULL = 1,        /* required pointer argument was NULL          */
  ELMPC_ERR_INVALID_ARG = 2, /* argument outside its documented domain      */
  ELMPC_ERR_DIMENSION = 3,   /* inconsistent matrix/vector dimensions       */
  ELMPC_ERR_SINGULAR = 4,    /* linear system (numerically) singular        */
  ELMPC_ERR_UNTRAINED = 5,   /* model has no fitted output layer yet        */
  ELMPC_ERR_IO = 6,          /* file could not be read or written           */
  ELMPC_ERR_PARSE = 7,       /* file contents malformed                     */
  ELMPC_ERR_NUMERIC = 8,     /* non-finite values or numerical breakdown    */
  ELMPC_ERR_DIVERGED = 9,    /* iteration left the representable domain     */
  ELMPC_ERR_INFEASIBLE = 10, /* constraint set provably empty               */
  ELMPC_ERR_UNKNOWN = 99
} elmpc_status;

/* Human-readable name of a status code.  Never NULL. */
const char* elmpc_status_str(elmpc_status s);

/* Message describing the most recent failure on the calling thread, or ""
 * if the last call succeeded.  The buffer is owned by the library. */
const char* elmpc_last_error(void);

/* Library version string (ELMPC_VERSION of the linked binary). */
const char* elmpc_version(void);

/* Release a buffer allocated by the library (CSV readers, QP loader). */
void elmpc_free(void* p);

/* ------------------------------------------------------------------ */
/* Model: random-hidden-layer network with ridge-fitted output layer.  */
/* ------------------------------------------------------------------ */

typedef struct elmpc_model elmpc_model;

/* Create an untrained model.  Hidden-layer weights and biases are drawn
 * uniformly from [-1, 1] using the library's fixed, documented generator,
 * so equal seeds give bitwise-equal models on every platform.  in_lo/in_hi
 * (length d_in) and out_lo/out_hi (length d_out) are the normalization
 * bounds; every pair must satisfy lo < hi. */
elmpc_status elmpc_model_create(int d_in, int d_out, int n_hidden,
                                uint64_t seed, const double* in_lo,
                                const double* in_hi, const double* out_lo,
                                const double* out_hi, elmpc_model** out);

void elmpc_model_destroy(elmpc_model* m);

/* Fit the output layer by ridge regression on n samples: X is n x d_in,
 * Y is n x d_out, row-major.  lambda >= 0; lambda = 0 is accepted only
 * when the hidden Gram matrix is numerically nonsingular. */
elmpc_status elmpc_model_train(elmpc_model* m, const double* X,
                               const double* Y, int n, double lambda);

/* One forward evaluation: x has length d_in, y_out length d_out. */
elmpc_status elmpc_model_predict(const elmpc_model* m, const double* x,
                                 double* y_out);

/* Closed-form derivative of predict at x: jac_out is d_out x d_in,
 * row-major. */
elmpc_status elmpc_model_jacobian(const elmpc_model* m, const double* x,
                                  double* jac_out);

elmpc_status elmpc_model_dims(const elmpc_model* m, int* d_in, int* d_out,
                              int* n_hidden);

/* Total number of stored weights: n_hidden * (d_in + d_out) + n_hidden. */
elmpc_status elmpc_model_param_count(const elmpc_model* m, int64_t* count);

/* Number of evaluations so far that fell outside the normalization box
 * (the model extrapolates rather than clipping; this counter is the
 * diagnostic for it). */
elmpc_status elmpc_model_extrapolation_count(const elmpc_model* m,
                                             uint64_t* count);

/* Save/load the full model in the library's plain-text matrix format.
 * A reloaded model reproduces predictions bit for bit. */
elmpc_status elmpc_model_save(const elmpc_model* m, const char* path);
elmpc_status elmpc_model_load(const char* path, elmpc_model** out);

/* ------------------------------------------------------------------ */
/* Excitation, regressor framing, open-loop evaluation.                */
/* ------------------------------------------------------------------ */

/* Amplitude-modulated pseudo-random binary-style excitation: each channel
 * is an independent piecewise-constant signal whose levels are uniform in
 * [lo_c, hi_c] and whose hold lengths are uniform integers in
 * [hold_min, hold_max].  out is length x channels, row-major. */
elmpc_status elmpc_aprbs_generate(int channels, const double* lo,
                                  const double* hi, int hold_min,
                                  int hold_max, int length, uint64_t seed,
                                  double* out);

/* Row count and regressor width produced by elmpc_narx_frame for a length-T
 * sequence pair with the given lag orders. */
elmpc_status elmpc_narx_dims(int T, int u_dim, int y_dim, int u_lags,
                             int y_lags, int* n_rows, int* n_features);

/* Build lagged regressors from an input/output sequence pair (u: T x u_dim,
 * y: T x y_dim).  Row k of X is [u(k-1)..u(k-u_lags), y(k-1)..y(k-y_lags)]
 * and row k of Y_out is y(k).  X is n_rows x n_features, Y_out is
 * n_rows x y_dim, sized per elmpc_narx_dims. */
elmpc_status elmpc_narx_frame(const double* u, const double* y, int T,
                              int u_dim, int y_dim, int u_lags, int y_lags,
                              double* X, double* Y_out);

/* One-step-ahead RMSE of the model over a framed dataset, computed in
 * normalized units (both prediction and target mapped through the model's
 * output normalization; squared errors are summed across output channels
 * and averaged over rows before the square root). */
elmpc_status elmpc_eval_osap(const elmpc_model* m, const double* X,
                             const double* Y, int n, double* rmse);

/* Free-running (recurrent) prediction: past model outputs are fed back in
 * place of measurements.  u_seq has u_lags + n_pred - 1 rows: rows
 * 0..u_lags-1 are the inputs immediately before the first predicted step,
 * row u_lags - 1 + t is the input applied at predicted step t.  y_hist has
 * y_lags rows, the measured outputs immediately before the first predicted
 * step (last row most recent).  y_pred receives n_pred x y_dim. */
elmpc_status elmpc_rollout(const elmpc_model* m, int u_dim, int y_dim,
                           int u_lags, int y_lags, const double* u_seq,
                           const double* y_hist, int n_pred, double* y_pred);

/* Free-running RMSE over a sequence pair in normalized units: consecutive
 * `horizon`-step rollouts, each restarted from measured lags, cover the
 * whole predictable range; horizon 1 equals the one-step evaluation. */
elmpc_status elmpc_eval_rollout(const elmpc_model* m, const double* u,
                                const double* y, int T, int u_dim, int y_dim,
                                int u_lags, int y_lags, int horizon,
                                double* rmse);

/* Train a model on a sequence pair: frames the data with the given lag
 * orders, derives normalization bounds from the framed data, draws the
 * hidden layer from `seed` and ridge-fits the output layer. */
elmpc_status elmpc_narx_train(const double* u, const double* y, int T,
                              int u_dim, int y_dim, int u_lags, int y_lags,
                              int n_hidden, double lambda, uint64_t seed,
                              elmpc_model** out);

/* Hyper-parameter search over the cross product of the three grids with a
 * chronological split: candidates are fitted on the first
 * floor(split * T) cycles and scored (one-step-ahead, normalized) on the
 * remainder.  Lag order is applied to inputs and outputs alike.  table
 * receives n_h_count * lambda_count * order_count rows of
 * [n_hidden, lambda, order, rmse] in grid order (n_hidden outermost,
 * order innermost).  best_index selects the winning row; ties prefer
 * fewer neurons, then lower order, then larger lambda.  split_index
 * receives the first cycle of the scoring segment. */
elmpc_status elmpc_cross_validate(const double* u, const double* y, int T,
                                  int u_dim, int y_dim, const int* n_h_grid,
                                  int n_h_count, const double* lambda_grid,
                                  int lambda_count, const int* order_grid,
                                  int order_count, double split,
                                  uint64_t seed, double* table,
                                  int* best_index, int* split_index);

/* ------------------------------------------------------------------ */
/* Dense convex QP:  minimize 0.5 x'Hx + g'x  subject to  Ax <= b.     */
/* ------------------------------------------------------------------ */

typedef struct elmpc_qp_options {
  double step;     /* dual gradient step; <= 0 selects the automatic one  */
  double tol;      /* fixed-point residual tolerance (default 1e-8)       */
  int max_iter;    /* iteration cap (default 20000)                       */
  const double* warm_start; /* length q dual start, or NULL for zeros     */
} elmpc_qp_options;

typedef struct elmpc_qp_result {
  int status;          /* 0 converged, 1 iteration cap, 2 infeasible      */
  int iterations;
  double kkt_residual; /* max of stationarity/feasibility/complementarity */
  double step_used;
} elmpc_qp_result;

/* Fill `opts` with the library defaults. */
void elmpc_qp_options_init(elmpc_qp_options* opts);

/* First-order dual solver: projected gradient ascent on the dual of the
 * inequality-constrained QP.  H is d x d symmetric positive definite,
 * A is q x d, q may be 0.  x receives the primal solution (length d);
 * mult, if non-NULL, receives the q dual multipliers. */
elmpc_status elmpc_qp_solve(const double* H, const double* g, int d,
                            const double* A, const double* b, int q,
                            const elmpc_qp_options* opts, double* x,
                            double* mult, elmpc_qp_result* result);

/* Exhaustive active-set reference solver for small problems (d <= 6,
 * q <= 12).  Independent of elmpc_qp_solve; intended for verification. */
elmpc_status elmpc_qp_solve_reference(const double* H, const double* g,
                                      int d, const double* A,
                                      const double* b, int q, double* x,
                                      double* mult,
                                      elmpc_qp_result* result);

/* Write/read a QP in the library's plain-text matrix format. */
elmpc_status elmpc_qp_dump(const double* H, const double* g, int d,
                           const double* A, const double* b, int q,
                           const char* path);
/* On success *H, *g, *A, *b are library-allocated (release with
 * elmpc_free); *A and *b are NULL when the problem has no constraints. */
elmpc_status elmpc_qp_load(const char* path, double** H, double** g, int* d,
                           double** A, double** b, int* q);

/* ------------------------------------------------------------------ */
/* Receding-horizon controller.                                        */
/* ------------------------------------------------------------------ */

typedef struct elmpc_controller elmpc_controller;

/* Controller configuration.  The model must map [input, state] of length
 * m + n to the next state of length n (lag order one).  `tracked` lists
 * the state indices that form the controlled output vector y (length p).
 * Weight vectors may be given per stage (length p resp. m) or fully
 * stacked (length horizon_pred * p resp. horizon_ctrl * m).  Rate and
 * range limits are hard; output and optional state limits are soft in the
 * sense that an unsolvable cycle drops them and is reported.  state_lo /
 * state_hi may be NULL (no state limits); individual entries may be
 * -+HUGE_VAL for one-sided limits. */
typedef struct elmpc_mpc_config {
  int horizon_pred;      /* prediction steps  (>= 1)                  */
  int horizon_ctrl;      /* control moves     (1 .. horizon_pred)     */
  const int* tracked;    /* p state indices                           */
  int n_tracked;
  const double* w_track; /* output tracking weights, p or Ny*p        */
  int w_track_len;
  const double* w_move;  /* move suppression weights, m or Nu*m       */
  int w_move_len;
  const double* u_lo;    /* input range, length m                     */
  const double* u_hi;
  const double* du_lo;   /* per-cycle input move range, length m      */
  const double* du_hi;
  const double* y_lo;    /* controlled-output range, length p         */
  const double* y_hi;
  const double* state_lo; /* optional state range, length n or NULL   */
  const double* state_hi;
  elmpc_qp_options qp;   /* dual solver settings                      */
} elmpc_mpc_config;

/* Fill `cfg` with neutral defaults (horizons 3, unit weights, solver
 * defaults; all bound pointers NULL -- bounds must still be provided
 * before elmpc_mpc_create except state_lo/state_hi). */
void elmpc_mpc_config_init(elmpc_mpc_config* cfg);

/* Create a controller around a copy of `m`.  u_init (length m) is the
 * last applied input the first cycle's move is measured against; it must
 * lie within [u_lo, u_hi]. */
elmpc_status elmpc_mpc_create(const elmpc_model* m,
                              const elmpc_mpc_config* cfg,
                              const double* u_init, elmpc_controller** out);

void elmpc_mpc_destroy(elmpc_controller* c);

/* Per-cycle diagnostics.  fallback: 0 none, 1 output/state rows dropped,
 * 2 zero move.  active_mask, if non-NULL, must hold at least
 * elmpc_mpc_constraint_count bytes and receives '0'/'1' per constraint
 * row (not NUL-terminated beyond the count). */
typedef struct elmpc_mpc_info {
  int qp_status;
  int qp_iterations;
  double kkt_residual;
  double hessian_condition;
  int fallback;
  int clamped;          /* nonzero if the net safety clamp engaged     */
  int n_active;
} elmpc_mpc_info;

/* Constraint rows of the cycle QP (without fallbacks). */
elmpc_status elmpc_mpc_constraint_count(const elmpc_controller* c, int* q);

/* One control cycle: linearize the model at (state, previous input),
 * condense the horizon, solve the dual QP warm-started from the previous
 * cycle, and return the input to apply (length m).  ref is the stacked
 * output reference over the prediction horizon, length
 * horizon_pred * p.  info and active_mask may be NULL. */
elmpc_status elmpc_mpc_step(elmpc_controller* c, const double* state,
                            const double* ref, double* u_out,
                            elmpc_mpc_info* info, char* active_mask);

/* Reset the held input (and discard the dual warm start). */
elmpc_status elmpc_mpc_reset(elmpc_controller* c, const double* u_init);

/* ------------------------------------------------------------------ */
/* Plants and closed-loop simulation.                                  */
/* ------------------------------------------------------------------ */

typedef struct elmpc_plant elmpc_plant;

/* Built-in six-state, three-input combustion-like benchmark plant with
 * fixed published coefficients (see README for the map and its operating
 * ranges). */
elmpc_status elmpc_plant_create_builtin(elmpc_plant** out);

/* Plant that advances by the model's own one-step prediction (the model
 * is copied).  The model must have lag order one: d_in = m + n,
 * d_out = n. */
elmpc_status elmpc_plant_create_model(const elmpc_model* m, int n_inputs,
                                      elmpc_plant** out);

void elmpc_plant_destroy(elmpc_plant* p);

elmpc_status elmpc_plant_dims(const elmpc_plant* p, int* n_states,
                              int* n_inputs);

/* Deterministic one-step transition (no measurement noise). */
elmpc_status elmpc_plant_step(const elmpc_plant* p, const double* state,
                              const double* input, double* next);

/* Fixed point of the transition map under a constant input, found by
 * damped iteration from the middle of the plant's operating range. */
elmpc_status elmpc_plant_steady_state(const elmpc_plant* p,
                                      const double* input, double* state);

/* Additive Gaussian measurement noise on selected state channels. */
typedef struct elmpc_noise_spec {
  int enabled;
  const int* channels;     /* state indices observed with noise        */
  const double* variances; /* same length as channels                  */
  int n_channels;
  uint64_t seed;
} elmpc_noise_spec;

/* Open-loop response: record the state trajectory under an input
 * sequence (u_seq: cycles x m).  states receives cycles x n rows; row k
 * is the (optionally noise-measured) state at cycle k, and row k+1 is
 * reached by applying u_seq row k.  noise may be NULL. */
elmpc_status elmpc_plant_rollout(const elmpc_plant* p, const double* state0,
                                 const double* u_seq, int cycles,
                                 const elmpc_noise_spec* noise,
                                 double* states);

/* Piecewise-constant reference: all channels switch together; hold
 * lengths are uniform integers in [hold_min, hold_max]; each channel's
 * level is uniform in [lo_c, hi_c], redrawn (up to 100 times) while
 * closer than min_delta_c to the previous level.  out is
 * length x channels. */
elmpc_status elmpc_reference_steps(int channels, const double* lo,
                                   const double* hi,
                                   const double* min_delta, int hold_min,
                                   int hold_max, int length, uint64_t seed,
                                   double* out);

/* Sum-of-one-sinusoid reference per channel:
 * out(k, c) = offset_c + amplitude_c * sin(2*pi*k / period_c + phase_c). */
elmpc_status elmpc_reference_sinusoid(int channels, const double* offset,
                                      const double* amplitude,
                                      const double* period,
                                      const double* phase, int length,
                                      double* out);

/* Aggregate results of a closed-loop run. */
typedef struct elmpc_sim_stats {
  int cycles_run;
  int failed;              /* nonzero: run aborted, trace is partial   */
  int fallback_count;
  int clamp_count;
  int input_violations;    /* applied input outside range (should be 0)*/
  int move_violations;     /* applied move outside range (should be 0) */
  int state_bound_violations;
  double qp_iterations_mean;
  int qp_iterations_max;
} elmpc_sim_stats;

/* Run `cycles` closed-loop cycles: measure (optionally with noise),
 * compute the input with the controller, advance the plant.  ref is
 * cycles x p (p = controller's tracked output count).  The controller is
 * stepped in place (reset it between runs for reproducibility).
 * trace_path / summary_path, when non-NULL, receive the per-cycle trace
 * CSV and the run summary; `comments`, when non-NULL, is written into
 * both files as leading '#' provenance lines.  tracking_rmse, when
 * non-NULL, receives p per-channel RMS tracking errors in engineering
 * units.  A run that exceeds `fallback_budget` controller fallbacks
 * (<= 0 selects max(20, cycles/10)) or leaves the representable domain
 * stops early with stats->failed set. */
elmpc_status elmpc_sim_run(const elmpc_plant* p, elmpc_controller* c,
                           const double* ref, int cycles,
                           const elmpc_noise_spec* noise,
                           const double* state0, int fallback_budget,
                           const char* trace_path, const char* summary_path,
                           const char* const* comments, int n_comments,
                           double* tracking_rmse, elmpc_sim_stats* stats);

/* ------------------------------------------------------------------ */
/* Sequence CSV helpers (format shared by every tool in the project).  */
/* ------------------------------------------------------------------ */

/* Write rows x cols values with one header row of column names and
 * optional leading '#' comment lines. */
elmpc_status elmpc_csv_write(const char* path, const double* data, int rows,
                             int cols, const char* const* col_names,
                             const char* const* comments, int n_comments);

/* Read a CSV written by elmpc_csv_write (comment lines are skipped).
 * *data is library-allocated, release with elmpc_free. */
elmpc_status elmpc_csv_read(const char* path, double** data, int* rows,
                            int* cols);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ELMPC_H */
