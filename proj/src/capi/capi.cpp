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

// C boundary of the shared library.  Every entry point follows the same
// shape: null-check the pointers, map row-major buffers onto Eigen types,
// call the core, translate exceptions into status codes.  No exception
// crosses this file.

#include "elmpc.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "core/elm.hpp"
#include "core/error.hpp"
#include "core/mpc.hpp"
#include "core/plant.hpp"
#include "core/qp.hpp"
#include "core/reference.hpp"
#include "core/rng.hpp"
#include "core/sim.hpp"
#include "core/sysid.hpp"
#include "core/textio.hpp"
#include "core/types.hpp"

using elmpc::Errc;
using elmpc::Index;
using elmpc::Mat;
using elmpc::Vec;

struct elmpc_model {
  elmpc::ElmModel impl;
};

struct elmpc_controller {
  elmpc::MpcController impl;
};

struct elmpc_plant {
  std::unique_ptr<elmpc::Plant> impl;
};

namespace {

thread_local std::string tls_error;

elmpc_status to_status(Errc c) {
  switch (c) {
  case Errc::invalid_argument:
    return ELMPC_ERR_INVALID_ARG;
  case Errc::dimension_mismatch:
    return ELMPC_ERR_DIMENSION;
  case Errc::singular_system:
    return ELMPC_ERR_SINGULAR;
  case Errc::untrained_model:
    return ELMPC_ERR_UNTRAINED;
  case Errc::io_error:
    return ELMPC_ERR_IO;
  case Errc::parse_error:
    return ELMPC_ERR_PARSE;
  case Errc::numeric_failure:
    return ELMPC_ERR_NUMERIC;
  case Errc::divergence:
    return ELMPC_ERR_DIVERGED;
  case Errc::infeasible:
    return ELMPC_ERR_INFEASIBLE;
  }
  return ELMPC_ERR_UNKNOWN;
}

template <typename F> elmpc_status run(F&& f) {
  try {
    f();
    tls_error.clear();
    return ELMPC_OK;
  } catch (const elmpc::Error& e) {
    tls_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    tls_error = "out of memory";
    return ELMPC_ERR_UNKNOWN;
  } catch (const std::exception& e) {
    tls_error = e.what();
    return ELMPC_ERR_UNKNOWN;
  } catch (...) {
    tls_error = "unrecognized failure";
    return ELMPC_ERR_UNKNOWN;
  }
}

elmpc_status null_arg(const char* name) {
  tls_error = std::string("required argument is NULL: ") + name;
  return ELMPC_ERR_NULL;
}

#define REQUIRE_PTR(p)                                                       \
  do {                                                                       \
    if ((p) == nullptr) return null_arg(#p);                                 \
  } while (0)

Vec to_vec(const double* p, int n) {
  return Eigen::Map<const Vec>(p, n);
}

Mat to_mat(const double* p, int rows, int cols) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                        Eigen::Dynamic, Eigen::RowMajor>>(
      p, rows, cols);
}

void from_mat(const Mat& m, double* out) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>(out, m.rows(), m.cols()) = m;
}

void from_vec(const Vec& v, double* out) {
  Eigen::Map<Vec>(out, v.size()) = v;
}

double* alloc_copy(const Mat& m) {
  auto* p = static_cast<double*>(
      std::malloc(sizeof(double) * static_cast<size_t>(m.size())));
  if (p == nullptr) throw std::bad_alloc();
  from_mat(m, p);
  return p;
}

double* alloc_copy(const Vec& v) {
  auto* p = static_cast<double*>(
      std::malloc(sizeof(double) * static_cast<size_t>(v.size())));
  if (p == nullptr) throw std::bad_alloc();
  from_vec(v, p);
  return p;
}

int qp_status_code(elmpc::QpStatus s) {
  switch (s) {
  case elmpc::QpStatus::converged:
    return 0;
  case elmpc::QpStatus::iteration_cap:
    return 1;
  case elmpc::QpStatus::infeasible:
    return 2;
  }
  return -1;
}

elmpc::QpOptions to_qp_options(const elmpc_qp_options* opts, int q) {
  elmpc::QpOptions o;
  if (opts == nullptr) return o;
  o.step = opts->step;
  o.tol = opts->tol;
  o.max_iter = opts->max_iter;
  if (opts->warm_start != nullptr && q > 0)
    o.warm_start = to_vec(opts->warm_start, q);
  return o;
}

void fill_qp_result(const elmpc::QpSolution& sol, elmpc_qp_result* r) {
  if (r == nullptr) return;
  r->status = qp_status_code(sol.status);
  r->iterations = sol.iterations;
  r->kkt_residual = sol.kkt_residual;
  r->step_used = sol.step_used;
}

elmpc::NoiseSpec to_noise(const elmpc_noise_spec* n) {
  elmpc::NoiseSpec spec;
  if (n == nullptr) return spec;
  spec.enabled = n->enabled != 0;
  spec.seed = n->seed;
  spec.channels.clear();
  if (n->enabled != 0) {
    elmpc::require(n->n_channels >= 0, Errc::invalid_argument,
                   "noise: negative channel count");
    elmpc::require(n->n_channels == 0 ||
                       (n->channels != nullptr && n->variances != nullptr),
                   Errc::invalid_argument,
                   "noise: channels/variances missing");
    spec.channels.assign(n->channels, n->channels + n->n_channels);
    spec.variances = to_vec(n->variances, n->n_channels);
  } else {
    spec.variances = Vec();
  }
  return spec;
}

std::vector<std::string> to_comments(const char* const* comments,
                                     int n_comments) {
  std::vector<std::string> out;
  elmpc::require(n_comments >= 0, Errc::invalid_argument,
                 "negative comment count");
  elmpc::require(n_comments == 0 || comments != nullptr,
                 Errc::invalid_argument, "comment array missing");
  out.reserve(static_cast<size_t>(n_comments));
  for (int i = 0; i < n_comments; ++i) {
    elmpc::require(comments[i] != nullptr, Errc::invalid_argument,
                   "NULL comment line");
    out.emplace_back(comments[i]);
  }
  return out;
}

} // namespace

const char* elmpc_status_str(elmpc_status s) {
  switch (s) {
  case ELMPC_OK:
    return "ok";
  case ELMPC_ERR_NULL:
    return "null argument";
  case ELMPC_ERR_INVALID_ARG:
    return "invalid argument";
  case ELMPC_ERR_DIMENSION:
    return "dimension mismatch";
  case ELMPC_ERR_SINGULAR:
    return "singular system";
  case ELMPC_ERR_UNTRAINED:
    return "untrained model";
  case ELMPC_ERR_IO:
    return "i/o failure";
  case ELMPC_ERR_PARSE:
    return "parse failure";
  case ELMPC_ERR_NUMERIC:
    return "numeric failure";
  case ELMPC_ERR_DIVERGED:
    return "iteration diverged";
  case ELMPC_ERR_INFEASIBLE:
    return "infeasible constraints";
  case ELMPC_ERR_UNKNOWN:
    break;
  }
  return "unknown failure";
}

const char* elmpc_last_error(void) { return tls_error.c_str(); }

const char* elmpc_version(void) { return ELMPC_VERSION; }

void elmpc_free(void* p) { std::free(p); }

/* ------------------------------------------------------------------ */

elmpc_status elmpc_model_create(int d_in, int d_out, int n_hidden,
                                uint64_t seed, const double* in_lo,
                                const double* in_hi, const double* out_lo,
                                const double* out_hi, elmpc_model** out) {
  REQUIRE_PTR(in_lo);
  REQUIRE_PTR(in_hi);
  REQUIRE_PTR(out_lo);
  REQUIRE_PTR(out_hi);
  REQUIRE_PTR(out);
  return run([&] {
    elmpc::require(d_in > 0 && d_out > 0 && n_hidden > 0,
                   Errc::invalid_argument, "model dims must be positive");
    elmpc::ElmModel m(d_in, d_out, n_hidden, seed, to_vec(in_lo, d_in),
                      to_vec(in_hi, d_in), to_vec(out_lo, d_out),
                      to_vec(out_hi, d_out));
    *out = new elmpc_model{std::move(m)};
  });
}

void elmpc_model_destroy(elmpc_model* m) { delete m; }

elmpc_status elmpc_model_train(elmpc_model* m, const double* X,
                               const double* Y, int n, double lambda) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(X);
  REQUIRE_PTR(Y);
  return run([&] {
    elmpc::require(n > 0, Errc::invalid_argument,
                   "train: sample count must be positive");
    m->impl.train(to_mat(X, n, m->impl.d_in()),
                  to_mat(Y, n, m->impl.d_out()), lambda);
  });
}

elmpc_status elmpc_model_predict(const elmpc_model* m, const double* x,
                                 double* y_out) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(x);
  REQUIRE_PTR(y_out);
  return run([&] {
    from_vec(m->impl.predict(to_vec(x, m->impl.d_in())), y_out);
  });
}

elmpc_status elmpc_model_jacobian(const elmpc_model* m, const double* x,
                                  double* jac_out) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(x);
  REQUIRE_PTR(jac_out);
  return run([&] {
    from_mat(m->impl.jacobian(to_vec(x, m->impl.d_in())), jac_out);
  });
}

elmpc_status elmpc_model_dims(const elmpc_model* m, int* d_in, int* d_out,
                              int* n_hidden) {
  REQUIRE_PTR(m);
  return run([&] {
    if (d_in != nullptr) *d_in = m->impl.d_in();
    if (d_out != nullptr) *d_out = m->impl.d_out();
    if (n_hidden != nullptr) *n_hidden = m->impl.n_hidden();
  });
}

elmpc_status elmpc_model_param_count(const elmpc_model* m, int64_t* count) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(count);
  return run([&] { *count = m->impl.param_count(); });
}

elmpc_status elmpc_model_extrapolation_count(const elmpc_model* m,
                                             uint64_t* count) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(count);
  return run([&] { *count = m->impl.extrapolations(); });
}

elmpc_status elmpc_model_save(const elmpc_model* m, const char* path) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(path);
  return run([&] { m->impl.save(std::string(path)); });
}

elmpc_status elmpc_model_load(const char* path, elmpc_model** out) {
  REQUIRE_PTR(path);
  REQUIRE_PTR(out);
  return run([&] {
    *out = new elmpc_model{elmpc::ElmModel::load(std::string(path))};
  });
}

/* ------------------------------------------------------------------ */

elmpc_status elmpc_aprbs_generate(int channels, const double* lo,
                                  const double* hi, int hold_min,
                                  int hold_max, int length, uint64_t seed,
                                  double* out) {
  REQUIRE_PTR(lo);
  REQUIRE_PTR(hi);
  REQUIRE_PTR(out);
  return run([&] {
    elmpc::require(channels > 0, Errc::invalid_argument,
                   "aprbs: channel count must be positive");
    elmpc::AprbsSpec spec;
    spec.level_lo = to_vec(lo, channels);
    spec.level_hi = to_vec(hi, channels);
    spec.hold_min = hold_min;
    spec.hold_max = hold_max;
    spec.seed = seed;
    from_mat(elmpc::gen_aprbs(spec, length), out);
  });
}

elmpc_status elmpc_narx_dims(int T, int u_dim, int y_dim, int u_lags,
                             int y_lags, int* n_rows, int* n_features) {
  REQUIRE_PTR(n_rows);
  REQUIRE_PTR(n_features);
  return run([&] {
    elmpc::require(u_dim > 0 && y_dim > 0, Errc::invalid_argument,
                   "framing: signal widths must be positive");
    elmpc::require(u_lags >= 1 && y_lags >= 1, Errc::invalid_argument,
                   "framing: lag orders must be >= 1");
    elmpc::NarxConfig cfg{u_dim, y_dim, u_lags, y_lags};
    elmpc::require(T > cfg.window(), Errc::invalid_argument,
                   "framing: sequence shorter than the lag window");
    *n_rows = T - cfg.window();
    *n_features = cfg.feature_dim();
  });
}

elmpc_status elmpc_narx_frame(const double* u, const double* y, int T,
                              int u_dim, int y_dim, int u_lags, int y_lags,
                              double* X, double* Y_out) {
  REQUIRE_PTR(u);
  REQUIRE_PTR(y);
  REQUIRE_PTR(X);
  REQUIRE_PTR(Y_out);
  return run([&] {
    elmpc::require(u_dim > 0 && y_dim > 0 && T > 0, Errc::invalid_argument,
                   "framing: signal shape must be positive");
    elmpc::NarxConfig cfg{u_dim, y_dim, u_lags, y_lags};
    elmpc::NarxDataset data =
        elmpc::build_narx(to_mat(u, T, u_dim), to_mat(y, T, y_dim), cfg);
    from_mat(data.X, X);
    from_mat(data.Y, Y_out);
  });
}

elmpc_status elmpc_eval_osap(const elmpc_model* m, const double* X,
                             const double* Y, int n, double* rmse) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(X);
  REQUIRE_PTR(Y);
  REQUIRE_PTR(rmse);
  return run([&] {
    elmpc::require(n > 0, Errc::invalid_argument,
                   "evaluate: sample count must be positive");
    elmpc::NarxDataset data;
    data.X = to_mat(X, n, m->impl.d_in());
    data.Y = to_mat(Y, n, m->impl.d_out());
    *rmse = elmpc::evaluate_osap(m->impl, data);
  });
}

elmpc_status elmpc_rollout(const elmpc_model* m, int u_dim, int y_dim,
                           int u_lags, int y_lags, const double* u_seq,
                           const double* y_hist, int n_pred,
                           double* y_pred) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(u_seq);
  REQUIRE_PTR(y_hist);
  REQUIRE_PTR(y_pred);
  return run([&] {
    elmpc::require(u_dim > 0 && y_dim > 0 && u_lags >= 1 && y_lags >= 1 &&
                       n_pred >= 1,
                   Errc::invalid_argument, "rollout: shape arguments");
    elmpc::NarxConfig cfg{u_dim, y_dim, u_lags, y_lags};
    Mat pred = elmpc::rollout_msap(
        m->impl, cfg, to_mat(u_seq, u_lags + n_pred - 1, u_dim),
        to_mat(y_hist, y_lags, y_dim), n_pred);
    from_mat(pred, y_pred);
  });
}

elmpc_status elmpc_eval_rollout(const elmpc_model* m, const double* u,
                                const double* y, int T, int u_dim,
                                int y_dim, int u_lags, int y_lags,
                                int horizon, double* rmse) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(u);
  REQUIRE_PTR(y);
  REQUIRE_PTR(rmse);
  return run([&] {
    elmpc::require(u_dim > 0 && y_dim > 0 && T > 0, Errc::invalid_argument,
                   "evaluate: signal shape must be positive");
    elmpc::NarxConfig cfg{u_dim, y_dim, u_lags, y_lags};
    *rmse = elmpc::evaluate_msap(m->impl, cfg, to_mat(u, T, u_dim),
                                 to_mat(y, T, y_dim), horizon);
  });
}

elmpc_status elmpc_narx_train(const double* u, const double* y, int T,
                              int u_dim, int y_dim, int u_lags, int y_lags,
                              int n_hidden, double lambda, uint64_t seed,
                              elmpc_model** out) {
  REQUIRE_PTR(u);
  REQUIRE_PTR(y);
  REQUIRE_PTR(out);
  return run([&] {
    elmpc::require(u_dim > 0 && y_dim > 0 && T > 0, Errc::invalid_argument,
                   "train: signal shape must be positive");
    elmpc::NarxConfig cfg{u_dim, y_dim, u_lags, y_lags};
    elmpc::ElmModel m =
        elmpc::train_narx(to_mat(u, T, u_dim), to_mat(y, T, y_dim), cfg,
                          n_hidden, lambda, seed);
    *out = new elmpc_model{std::move(m)};
  });
}

elmpc_status elmpc_cross_validate(const double* u, const double* y, int T,
                                  int u_dim, int y_dim, const int* n_h_grid,
                                  int n_h_count, const double* lambda_grid,
                                  int lambda_count, const int* order_grid,
                                  int order_count, double split,
                                  uint64_t seed, double* table,
                                  int* best_index, int* split_index) {
  REQUIRE_PTR(u);
  REQUIRE_PTR(y);
  REQUIRE_PTR(n_h_grid);
  REQUIRE_PTR(lambda_grid);
  REQUIRE_PTR(order_grid);
  REQUIRE_PTR(table);
  REQUIRE_PTR(best_index);
  REQUIRE_PTR(split_index);
  return run([&] {
    elmpc::require(u_dim > 0 && y_dim > 0 && T > 0, Errc::invalid_argument,
                   "search: signal shape must be positive");
    elmpc::require(n_h_count > 0 && lambda_count > 0 && order_count > 0,
                   Errc::invalid_argument, "search: empty grid");
    elmpc::CvResult res = elmpc::cross_validate(
        to_mat(u, T, u_dim), to_mat(y, T, y_dim),
        std::vector<int>(n_h_grid, n_h_grid + n_h_count),
        std::vector<double>(lambda_grid, lambda_grid + lambda_count),
        std::vector<int>(order_grid, order_grid + order_count), split,
        seed);
    int best = -1;
    for (size_t i = 0; i < res.table.size(); ++i) {
      const elmpc::CvScore& sc = res.table[i];
      table[4 * i + 0] = sc.cand.n_hidden;
      table[4 * i + 1] = sc.cand.lambda;
      table[4 * i + 2] = sc.cand.order;
      table[4 * i + 3] = sc.rmse;
      if (best < 0 && sc.cand.n_hidden == res.best.n_hidden &&
          sc.cand.lambda == res.best.lambda &&
          sc.cand.order == res.best.order)
        best = static_cast<int>(i);
    }
    elmpc::require(best >= 0, Errc::numeric_failure,
                   "search: winner missing from the table");
    *best_index = best;
    *split_index = res.split_index;
  });
}

/* ------------------------------------------------------------------ */

void elmpc_qp_options_init(elmpc_qp_options* opts) {
  if (opts == nullptr) return;
  elmpc::QpOptions d;
  opts->step = d.step;
  opts->tol = d.tol;
  opts->max_iter = d.max_iter;
  opts->warm_start = nullptr;
}

namespace {

elmpc::QpProblem to_qp_problem(const double* H, const double* g, int d,
                               const double* A, const double* b, int q) {
  elmpc::require(d > 0, Errc::invalid_argument,
                 "qp: variable count must be positive");
  elmpc::require(q >= 0, Errc::invalid_argument,
                 "qp: negative constraint count");
  elmpc::require(q == 0 || (A != nullptr && b != nullptr),
                 Errc::invalid_argument, "qp: constraints missing");
  elmpc::QpProblem p;
  p.H = to_mat(H, d, d);
  p.g = to_vec(g, d);
  if (q > 0) {
    p.A = to_mat(A, q, d);
    p.b = to_vec(b, q);
  } else {
    p.A = Mat(0, d);
    p.b = Vec(0);
  }
  return p;
}

} // namespace

elmpc_status elmpc_qp_solve(const double* H, const double* g, int d,
                            const double* A, const double* b, int q,
                            const elmpc_qp_options* opts, double* x,
                            double* mult, elmpc_qp_result* result) {
  REQUIRE_PTR(H);
  REQUIRE_PTR(g);
  REQUIRE_PTR(x);
  return run([&] {
    elmpc::QpProblem p = to_qp_problem(H, g, d, A, b, q);
    elmpc::QpSolution sol = elmpc::solve_fast(p, to_qp_options(opts, q));
    from_vec(sol.x, x);
    if (mult != nullptr && q > 0) from_vec(sol.multipliers, mult);
    fill_qp_result(sol, result);
  });
}

elmpc_status elmpc_qp_solve_reference(const double* H, const double* g,
                                      int d, const double* A,
                                      const double* b, int q, double* x,
                                      double* mult,
                                      elmpc_qp_result* result) {
  REQUIRE_PTR(H);
  REQUIRE_PTR(g);
  REQUIRE_PTR(x);
  return run([&] {
    elmpc::QpProblem p = to_qp_problem(H, g, d, A, b, q);
    elmpc::QpSolution sol = elmpc::solve_oracle(p);
    from_vec(sol.x, x);
    if (mult != nullptr && q > 0) from_vec(sol.multipliers, mult);
    fill_qp_result(sol, result);
  });
}

elmpc_status elmpc_qp_dump(const double* H, const double* g, int d,
                           const double* A, const double* b, int q,
                           const char* path) {
  REQUIRE_PTR(H);
  REQUIRE_PTR(g);
  REQUIRE_PTR(path);
  return run([&] {
    elmpc::dump_qp(to_qp_problem(H, g, d, A, b, q), std::string(path));
  });
}

elmpc_status elmpc_qp_load(const char* path, double** H, double** g, int* d,
                           double** A, double** b, int* q) {
  REQUIRE_PTR(path);
  REQUIRE_PTR(H);
  REQUIRE_PTR(g);
  REQUIRE_PTR(d);
  REQUIRE_PTR(A);
  REQUIRE_PTR(b);
  REQUIRE_PTR(q);
  return run([&] {
    elmpc::QpProblem p = elmpc::load_qp(std::string(path));
    *H = alloc_copy(p.H);
    *g = alloc_copy(p.g);
    *d = static_cast<int>(p.H.rows());
    *q = static_cast<int>(p.A.rows());
    if (p.A.rows() > 0) {
      *A = alloc_copy(p.A);
      *b = alloc_copy(p.b);
    } else {
      *A = nullptr;
      *b = nullptr;
    }
  });
}

/* ------------------------------------------------------------------ */

void elmpc_mpc_config_init(elmpc_mpc_config* cfg) {
  if (cfg == nullptr) return;
  std::memset(cfg, 0, sizeof(*cfg));
  cfg->horizon_pred = 3;
  cfg->horizon_ctrl = 3;
  elmpc_qp_options_init(&cfg->qp);
}

namespace {

// The move-vector length m is needed before the core config can be built;
// derive it from the model the controller wraps.
elmpc::MpcConfig to_mpc_config(const elmpc_mpc_config* cfg, int n, int m) {
  elmpc::require(cfg->tracked != nullptr && cfg->n_tracked > 0,
                 Errc::invalid_argument,
                 "controller: tracked state list missing");
  elmpc::require(cfg->u_lo != nullptr && cfg->u_hi != nullptr &&
                     cfg->du_lo != nullptr && cfg->du_hi != nullptr &&
                     cfg->y_lo != nullptr && cfg->y_hi != nullptr,
                 Errc::invalid_argument, "controller: bounds missing");
  elmpc::require((cfg->state_lo == nullptr) == (cfg->state_hi == nullptr),
                 Errc::invalid_argument,
                 "controller: state bounds must come in pairs");

  const int p = cfg->n_tracked;
  elmpc::MpcConfig c;
  c.horizon_pred = cfg->horizon_pred;
  c.horizon_ctrl = cfg->horizon_ctrl;
  c.tracked.assign(cfg->tracked, cfg->tracked + p);
  c.w_track = cfg->w_track != nullptr
                  ? to_vec(cfg->w_track, cfg->w_track_len)
                  : Vec::Ones(p);
  c.w_move = cfg->w_move != nullptr ? to_vec(cfg->w_move, cfg->w_move_len)
                                    : Vec::Ones(m);
  c.u_lo = to_vec(cfg->u_lo, m);
  c.u_hi = to_vec(cfg->u_hi, m);
  c.du_lo = to_vec(cfg->du_lo, m);
  c.du_hi = to_vec(cfg->du_hi, m);
  c.y_lo = to_vec(cfg->y_lo, p);
  c.y_hi = to_vec(cfg->y_hi, p);
  if (cfg->state_lo != nullptr) {
    c.state_lo = to_vec(cfg->state_lo, n);
    c.state_hi = to_vec(cfg->state_hi, n);
  }
  c.qp.step = cfg->qp.step;
  c.qp.tol = cfg->qp.tol;
  c.qp.max_iter = cfg->qp.max_iter;
  return c;
}

} // namespace

elmpc_status elmpc_mpc_create(const elmpc_model* m,
                              const elmpc_mpc_config* cfg,
                              const double* u_init,
                              elmpc_controller** out) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(cfg);
  REQUIRE_PTR(u_init);
  REQUIRE_PTR(out);
  return run([&] {
    const int n = m->impl.d_out();
    const int mm = m->impl.d_in() - n;
    elmpc::require(mm >= 1, Errc::dimension_mismatch,
                   "controller: model is not a lag-one transition map");
    elmpc::MpcConfig c = to_mpc_config(cfg, n, mm);
    *out = new elmpc_controller{
        elmpc::MpcController(m->impl, c, to_vec(u_init, mm))};
  });
}

void elmpc_mpc_destroy(elmpc_controller* c) { delete c; }

elmpc_status elmpc_mpc_constraint_count(const elmpc_controller* c, int* q) {
  REQUIRE_PTR(c);
  REQUIRE_PTR(q);
  return run([&] { *q = c->impl.constraint_count(); });
}

elmpc_status elmpc_mpc_step(elmpc_controller* c, const double* state,
                            const double* ref, double* u_out,
                            elmpc_mpc_info* info, char* active_mask) {
  REQUIRE_PTR(c);
  REQUIRE_PTR(state);
  REQUIRE_PTR(ref);
  REQUIRE_PTR(u_out);
  return run([&] {
    elmpc::StepDiagnostics diag;
    Vec u = c->impl.step(
        to_vec(state, c->impl.n_states()),
        to_vec(ref, c->impl.config().horizon_pred * c->impl.n_tracked()),
        &diag);
    from_vec(u, u_out);
    if (info != nullptr) {
      info->qp_status = qp_status_code(diag.qp_status);
      info->qp_iterations = diag.qp_iterations;
      info->kkt_residual = diag.kkt_residual;
      info->hessian_condition = diag.hessian_condition;
      info->fallback = diag.fallback;
      info->clamped = diag.clamped ? 1 : 0;
      info->n_active = diag.n_active;
    }
    if (active_mask != nullptr)
      std::memcpy(active_mask, diag.active_mask.data(),
                  diag.active_mask.size());
  });
}

elmpc_status elmpc_mpc_reset(elmpc_controller* c, const double* u_init) {
  REQUIRE_PTR(c);
  REQUIRE_PTR(u_init);
  return run([&] { c->impl.reset(to_vec(u_init, c->impl.n_inputs())); });
}

/* ------------------------------------------------------------------ */

elmpc_status elmpc_plant_create_builtin(elmpc_plant** out) {
  REQUIRE_PTR(out);
  return run([&] {
    *out = new elmpc_plant{std::make_unique<elmpc::BenchmarkPlant>()};
  });
}

elmpc_status elmpc_plant_create_model(const elmpc_model* m, int n_inputs,
                                      elmpc_plant** out) {
  REQUIRE_PTR(m);
  REQUIRE_PTR(out);
  return run([&] {
    *out = new elmpc_plant{
        std::make_unique<elmpc::ModelPlant>(m->impl, n_inputs)};
  });
}

void elmpc_plant_destroy(elmpc_plant* p) { delete p; }

elmpc_status elmpc_plant_dims(const elmpc_plant* p, int* n_states,
                              int* n_inputs) {
  REQUIRE_PTR(p);
  return run([&] {
    if (n_states != nullptr) *n_states = p->impl->n_states();
    if (n_inputs != nullptr) *n_inputs = p->impl->n_inputs();
  });
}

elmpc_status elmpc_plant_step(const elmpc_plant* p, const double* state,
                              const double* input, double* next) {
  REQUIRE_PTR(p);
  REQUIRE_PTR(state);
  REQUIRE_PTR(input);
  REQUIRE_PTR(next);
  return run([&] {
    Vec z = p->impl->step(to_vec(state, p->impl->n_states()),
                          to_vec(input, p->impl->n_inputs()));
    elmpc::require(z.allFinite(), Errc::numeric_failure,
                   "plant step produced non-finite state");
    from_vec(z, next);
  });
}

elmpc_status elmpc_plant_steady_state(const elmpc_plant* p,
                                      const double* input, double* state) {
  REQUIRE_PTR(p);
  REQUIRE_PTR(input);
  REQUIRE_PTR(state);
  return run([&] {
    Vec z = elmpc::steady_state(*p->impl,
                                to_vec(input, p->impl->n_inputs()),
                                p->impl->nominal_state());
    from_vec(z, state);
  });
}

elmpc_status elmpc_plant_rollout(const elmpc_plant* p, const double* state0,
                                 const double* u_seq, int cycles,
                                 const elmpc_noise_spec* noise,
                                 double* states) {
  REQUIRE_PTR(p);
  REQUIRE_PTR(state0);
  REQUIRE_PTR(u_seq);
  REQUIRE_PTR(states);
  return run([&] {
    elmpc::require(cycles > 0, Errc::invalid_argument,
                   "rollout: cycle count must be positive");
    const int n = p->impl->n_states();
    const int m = p->impl->n_inputs();
    elmpc::NoiseSpec spec = to_noise(noise);
    elmpc::Rng rng(spec.seed);
    Mat u = to_mat(u_seq, cycles, m);
    Vec z = to_vec(state0, n);
    Mat out(cycles, n);
    for (int k = 0; k < cycles; ++k) {
      out.row(k) = elmpc::measure(z, spec, rng).transpose();
      z = p->impl->step(z, u.row(k).transpose());
      elmpc::require(z.allFinite(), Errc::divergence,
                     "rollout left the representable range");
    }
    from_mat(out, states);
  });
}

elmpc_status elmpc_reference_steps(int channels, const double* lo,
                                   const double* hi,
                                   const double* min_delta, int hold_min,
                                   int hold_max, int length, uint64_t seed,
                                   double* out) {
  REQUIRE_PTR(lo);
  REQUIRE_PTR(hi);
  REQUIRE_PTR(out);
  return run([&] {
    elmpc::require(channels > 0, Errc::invalid_argument,
                   "reference: channel count must be positive");
    elmpc::StepReferenceSpec spec;
    spec.level_lo = to_vec(lo, channels);
    spec.level_hi = to_vec(hi, channels);
    if (min_delta != nullptr) spec.min_delta = to_vec(min_delta, channels);
    spec.hold_min = hold_min;
    spec.hold_max = hold_max;
    spec.seed = seed;
    from_mat(elmpc::make_step_reference(spec, length), out);
  });
}

elmpc_status elmpc_reference_sinusoid(int channels, const double* offset,
                                      const double* amplitude,
                                      const double* period,
                                      const double* phase, int length,
                                      double* out) {
  REQUIRE_PTR(offset);
  REQUIRE_PTR(amplitude);
  REQUIRE_PTR(period);
  REQUIRE_PTR(phase);
  REQUIRE_PTR(out);
  return run([&] {
    elmpc::require(channels > 0, Errc::invalid_argument,
                   "reference: channel count must be positive");
    elmpc::SinusoidReferenceSpec spec;
    spec.offset = to_vec(offset, channels);
    spec.amplitude = to_vec(amplitude, channels);
    spec.period = to_vec(period, channels);
    spec.phase = to_vec(phase, channels);
    from_mat(elmpc::make_sinusoid_reference(spec, length), out);
  });
}

elmpc_status elmpc_sim_run(const elmpc_plant* p, elmpc_controller* c,
                           const double* ref, int cycles,
                           const elmpc_noise_spec* noise,
                           const double* state0, int fallback_budget,
                           const char* trace_path, const char* summary_path,
                           const char* const* comments, int n_comments,
                           double* tracking_rmse, elmpc_sim_stats* stats) {
  REQUIRE_PTR(p);
  REQUIRE_PTR(c);
  REQUIRE_PTR(ref);
  return run([&] {
    elmpc::require(cycles > 0, Errc::invalid_argument,
                   "run: cycle count must be positive");
    elmpc::RunOptions opt;
    opt.noise = to_noise(noise);
    if (state0 != nullptr)
      opt.initial_state = to_vec(state0, p->impl->n_states());
    opt.fallback_budget = fallback_budget;
    Mat r = to_mat(ref, cycles, c->impl.n_tracked());
    elmpc::RunResult res =
        elmpc::run_closed_loop(*p->impl, c->impl, r, opt);
    std::vector<std::string> lines = to_comments(comments, n_comments);
    if (trace_path != nullptr && !res.trace.rows.empty())
      elmpc::write_trace_csv(res.trace, std::string(trace_path), lines);
    if (summary_path != nullptr)
      elmpc::write_summary(res.summary, std::string(summary_path), lines);
    if (tracking_rmse != nullptr)
      from_vec(res.summary.tracking_rmse, tracking_rmse);
    if (stats != nullptr) {
      stats->cycles_run = res.summary.cycles_run;
      stats->failed = res.summary.failed ? 1 : 0;
      stats->fallback_count = res.summary.fallback_count;
      stats->clamp_count = res.summary.clamp_count;
      stats->input_violations = res.summary.input_violations;
      stats->move_violations = res.summary.move_violations;
      stats->state_bound_violations = res.summary.state_bound_violations;
      stats->qp_iterations_mean = res.summary.qp_iterations_mean;
      stats->qp_iterations_max = res.summary.qp_iterations_max;
    }
  });
}

/* ------------------------------------------------------------------ */

elmpc_status elmpc_csv_write(const char* path, const double* data, int rows,
                             int cols, const char* const* col_names,
                             const char* const* comments, int n_comments) {
  REQUIRE_PTR(path);
  REQUIRE_PTR(data);
  REQUIRE_PTR(col_names);
  return run([&] {
    elmpc::require(rows > 0 && cols > 0, Errc::invalid_argument,
                   "csv: shape must be positive");
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(cols));
    for (int i = 0; i < cols; ++i) {
      elmpc::require(col_names[i] != nullptr, Errc::invalid_argument,
                     "csv: NULL column name");
      names.emplace_back(col_names[i]);
    }
    elmpc::write_csv(std::string(path), to_mat(data, rows, cols), names,
                     to_comments(comments, n_comments));
  });
}

elmpc_status elmpc_csv_read(const char* path, double** data, int* rows,
                            int* cols) {
  REQUIRE_PTR(path);
  REQUIRE_PTR(data);
  REQUIRE_PTR(rows);
  REQUIRE_PTR(cols);
  return run([&] {
    elmpc::CsvData csv = elmpc::read_csv(std::string(path));
    *data = alloc_copy(csv.values);
    *rows = static_cast<int>(csv.values.rows());
    *cols = static_cast<int>(csv.values.cols());
  });
}
