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

#include "core/mpc.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace elmpc {

LinearizedSystem linearize(const ElmModel& m, const Vec& state,
                           const Vec& input, const std::vector<int>& tracked) {
  const int n = m.d_out();
  const int nm = m.d_in();
  require(nm > n, Errc::dimension_mismatch,
          "linearize: model must map [input, state] to state (lag one)");
  const int inputs = nm - n;
  require(state.size() == n && input.size() == inputs,
          Errc::dimension_mismatch, "linearize: state/input lengths");
  require(!tracked.empty(), Errc::invalid_argument,
          "linearize: tracked set is empty");

  Vec x(nm);
  x << input, state;
  Mat jac = m.jacobian(x);
  auto ab = split_ab(jac, n, inputs);

  LinearizedSystem lin;
  lin.A = std::move(ab.A);
  lin.B = std::move(ab.B);
  lin.C = Mat::Zero(static_cast<Index>(tracked.size()), n);
  for (size_t i = 0; i < tracked.size(); ++i) {
    require(tracked[i] >= 0 && tracked[i] < n, Errc::invalid_argument,
            "linearize: tracked index out of range");
    lin.C(static_cast<Index>(i), tracked[i]) = 1.0;
  }
  lin.bias = m.predict(x) - lin.A * state - lin.B * input;
  lin.out_bias = Vec::Zero(static_cast<Index>(tracked.size()));
  return lin;
}

PredictionMatrices build_prediction(const Mat& A, const Mat& B, const Mat& C,
                                    int horizon_pred, int horizon_ctrl) {
  const Index n = A.rows();
  const Index mm = B.cols();
  const Index p = C.rows();
  require(A.cols() == n && B.rows() == n && C.cols() == n,
          Errc::dimension_mismatch, "build_prediction: system shapes");
  require(horizon_pred >= 1 && horizon_ctrl >= 1 &&
              horizon_ctrl <= horizon_pred,
          Errc::invalid_argument,
          "build_prediction: need 1 <= horizon_ctrl <= horizon_pred");

  PredictionMatrices pm;
  pm.from_state.resize(p * horizon_pred, n);
  pm.from_moves = Mat::Zero(p * horizon_pred, mm * horizon_ctrl);
  pm.from_held.resize(p * horizon_pred, mm);
  pm.from_state_bias.resize(p * horizon_pred, n);
  pm.from_output_bias = Mat::Zero(p * horizon_pred, p);

  // Running terms: power = A^j, geo = sum_{t<j} A^t, geo_b = geo * B.
  Mat power = A;
  Mat geo = Mat::Identity(n, n);
  std::vector<Mat> geo_b(horizon_pred); // geo_b[j] = sum_{t<=j} A^t B
  for (int j = 1; j <= horizon_pred; ++j) {
    Index r = static_cast<Index>(j - 1) * p;
    pm.from_state.middleRows(r, p) = C * power;
    pm.from_state_bias.middleRows(r, p) = C * geo;
    geo_b[j - 1] = geo * B;
    pm.from_held.middleRows(r, p) = C * geo_b[j - 1];
    pm.from_output_bias.middleRows(r, p) =
        Mat::Identity(p, p);
    for (int c = 1; c <= horizon_ctrl && c <= j; ++c)
      pm.from_moves.block(r, static_cast<Index>(c - 1) * mm, p, mm) =
          C * geo_b[j - c];
    if (j < horizon_pred) {
      geo += power;
      power = (power * A).eval();
    }
  }
  return pm;
}

Vec expand_stage_weights(const Vec& w, int stages, int per_stage) {
  if (w.size() == static_cast<Index>(stages) * per_stage) return w;
  require(w.size() == per_stage, Errc::dimension_mismatch,
          "weights must be per-stage or fully stacked");
  Vec out(static_cast<Index>(stages) * per_stage);
  for (int s = 0; s < stages; ++s) out.segment(s * per_stage, per_stage) = w;
  return out;
}

namespace {

Vec stack(const Vec& v, int times) {
  Vec out(v.size() * times);
  for (int i = 0; i < times; ++i) out.segment(i * v.size(), v.size()) = v;
  return out;
}

} // namespace

CycleQp build_qp(const LinearizedSystem& lin, const PredictionMatrices& pred,
                 const Vec& ref_stack, const Vec& state, const Vec& u_prev,
                 const MpcConfig& cfg) {
  const Index n = lin.A.rows();
  const Index mm = lin.B.cols();
  const Index p = lin.C.rows();
  const int Ny = cfg.horizon_pred;
  const int Nu = cfg.horizon_ctrl;
  const Index d = mm * Nu;
  require(ref_stack.size() == p * Ny, Errc::dimension_mismatch,
          "build_qp: reference stack length");

  Vec w1 = expand_stage_weights(cfg.w_track, Ny, static_cast<int>(p));
  Vec w2 = expand_stage_weights(cfg.w_move, Nu, static_cast<int>(mm));
  for (Index i = 0; i < w2.size(); ++i)
    require(w2[i] > 0.0, Errc::invalid_argument,
            "build_qp: move weights must be strictly positive");

  Vec free_resp = pred.from_state * state + pred.from_held * u_prev +
                  pred.from_state_bias * lin.bias +
                  pred.from_output_bias * lin.out_bias;

  CycleQp cq;
  cq.free_response = free_resp;
  cq.qp.H = 2.0 * (pred.from_moves.transpose() * w1.asDiagonal() *
                       pred.from_moves +
                   Mat(w2.asDiagonal()));
  cq.qp.g =
      -2.0 * pred.from_moves.transpose() * (w1.asDiagonal() *
                                            (ref_stack - free_resp));

  // Hard input rows first (moves, then absolute inputs via the running-sum
  // map), then the relaxable output and state rows.
  Mat hold_map = Mat::Zero(d, d);
  for (int i = 0; i < Nu; ++i)
    for (int c = 0; c <= i; ++c)
      hold_map.block(static_cast<Index>(i) * mm, static_cast<Index>(c) * mm,
                     mm, mm) = Mat::Identity(mm, mm);

  // Optional per-state rows over the horizon.
  struct StateRow {
    Index flat;  // row into the state-level prediction
    double limit;
    double sign; // +1 upper, -1 lower
  };
  std::vector<StateRow> upper_rows, lower_rows;
  PredictionMatrices spred;
  Vec sfree;
  bool any_state = cfg.state_lo.size() > 0 || cfg.state_hi.size() > 0;
  if (any_state) {
    require((cfg.state_lo.size() == 0 || cfg.state_lo.size() == n) &&
                (cfg.state_hi.size() == 0 || cfg.state_hi.size() == n),
            Errc::dimension_mismatch, "build_qp: state bound lengths");
    spred = build_prediction(lin.A, lin.B, Mat(Mat::Identity(n, n)), Ny, Nu);
    sfree = spred.from_state * state + spred.from_held * u_prev +
            spred.from_state_bias * lin.bias;
    for (int j = 0; j < Ny; ++j)
      for (Index s = 0; s < n; ++s) {
        Index flat = static_cast<Index>(j) * n + s;
        if (cfg.state_hi.size() > 0 && std::isfinite(cfg.state_hi[s]))
          upper_rows.push_back({flat, cfg.state_hi[s], 1.0});
        if (cfg.state_lo.size() > 0 && std::isfinite(cfg.state_lo[s]))
          lower_rows.push_back({flat, cfg.state_lo[s], -1.0});
      }
  }

  const Index q = 4 * d + 2 * p * Ny +
                  static_cast<Index>(upper_rows.size() + lower_rows.size());
  cq.qp.A = Mat::Zero(q, d);
  cq.qp.b.resize(q);
  Index at = 0;

  cq.qp.A.middleRows(at, d) = Mat::Identity(d, d);
  cq.qp.b.segment(at, d) = stack(cfg.du_hi, Nu);
  at += d;
  cq.qp.A.middleRows(at, d) = -Mat::Identity(d, d);
  cq.qp.b.segment(at, d) = -stack(cfg.du_lo, Nu);
  at += d;
  cq.qp.A.middleRows(at, d) = hold_map;
  cq.qp.b.segment(at, d) = stack(cfg.u_hi - u_prev, Nu);
  at += d;
  cq.qp.A.middleRows(at, d) = -hold_map;
  cq.qp.b.segment(at, d) = -stack(cfg.u_lo - u_prev, Nu);
  at += d;

  cq.n_soft_begin = static_cast<int>(at);

  cq.qp.A.middleRows(at, p * Ny) = pred.from_moves;
  cq.qp.b.segment(at, p * Ny) = stack(cfg.y_hi, Ny) - free_resp;
  at += p * Ny;
  cq.qp.A.middleRows(at, p * Ny) = -pred.from_moves;
  cq.qp.b.segment(at, p * Ny) = -(stack(cfg.y_lo, Ny) - free_resp);
  at += p * Ny;

  for (const auto& row : upper_rows) {
    cq.qp.A.row(at) = spred.from_moves.row(row.flat);
    cq.qp.b[at] = row.limit - sfree[row.flat];
    ++at;
  }
  for (const auto& row : lower_rows) {
    cq.qp.A.row(at) = -spred.from_moves.row(row.flat);
    cq.qp.b[at] = -(row.limit - sfree[row.flat]);
    ++at;
  }
  return cq;
}

MpcController::MpcController(const ElmModel& model, const MpcConfig& cfg,
                             const Vec& u_init)
    : model_(model), cfg_(cfg) {
  require(model_.trained(), Errc::untrained_model,
          "controller needs a trained model");
  n_ = model_.d_out();
  m_ = model_.d_in() - n_;
  require(m_ > 0, Errc::dimension_mismatch,
          "controller model must have lag order one (d_in = m + n)");
  p_ = static_cast<int>(cfg_.tracked.size());
  require(p_ > 0, Errc::invalid_argument, "no tracked outputs configured");
  for (int t : cfg_.tracked)
    require(t >= 0 && t < n_, Errc::invalid_argument,
            "tracked index out of range");
  require(cfg_.horizon_pred >= 1 && cfg_.horizon_ctrl >= 1 &&
              cfg_.horizon_ctrl <= cfg_.horizon_pred,
          Errc::invalid_argument, "bad horizons");

  auto need = [](const Vec& v, Index len, const char* what) {
    require(v.size() == len, Errc::dimension_mismatch,
            std::string("controller config: ") + what);
  };
  need(cfg_.u_lo, m_, "u_lo length");
  need(cfg_.u_hi, m_, "u_hi length");
  need(cfg_.du_lo, m_, "du_lo length");
  need(cfg_.du_hi, m_, "du_hi length");
  need(cfg_.y_lo, p_, "y_lo length");
  need(cfg_.y_hi, p_, "y_hi length");
  for (Index i = 0; i < m_; ++i) {
    require(cfg_.u_lo[i] < cfg_.u_hi[i], Errc::invalid_argument,
            "u_lo must be < u_hi");
    require(cfg_.du_lo[i] <= 0.0 && cfg_.du_hi[i] >= 0.0,
            Errc::invalid_argument,
            "move limits must bracket zero (du_lo <= 0 <= du_hi)");
  }
  for (Index i = 0; i < p_; ++i)
    require(cfg_.y_lo[i] < cfg_.y_hi[i], Errc::invalid_argument,
            "y_lo must be < y_hi");

  cfg_.w_track = expand_stage_weights(cfg_.w_track, cfg_.horizon_pred, p_);
  cfg_.w_move = expand_stage_weights(cfg_.w_move, cfg_.horizon_ctrl, m_);
  for (Index i = 0; i < cfg_.w_track.size(); ++i)
    require(cfg_.w_track[i] >= 0.0, Errc::invalid_argument,
            "tracking weights must be >= 0");

  int extra = 0;
  if (cfg_.state_lo.size() > 0 || cfg_.state_hi.size() > 0) {
    require((cfg_.state_lo.size() == 0 || cfg_.state_lo.size() == n_) &&
                (cfg_.state_hi.size() == 0 || cfg_.state_hi.size() == n_),
            Errc::dimension_mismatch, "state bound lengths");
    for (Index i = 0; cfg_.state_hi.size() > 0 && i < n_; ++i)
      if (std::isfinite(cfg_.state_hi[i])) extra += cfg_.horizon_pred;
    for (Index i = 0; cfg_.state_lo.size() > 0 && i < n_; ++i)
      if (std::isfinite(cfg_.state_lo[i])) extra += cfg_.horizon_pred;
  }
  q_ = 4 * m_ * cfg_.horizon_ctrl + 2 * p_ * cfg_.horizon_pred + extra;

  reset(u_init);
}

void MpcController::reset(const Vec& u_init) {
  require(u_init.size() == m_, Errc::dimension_mismatch,
          "reset: input length");
  for (Index i = 0; i < m_; ++i)
    require(u_init[i] >= cfg_.u_lo[i] && u_init[i] <= cfg_.u_hi[i],
            Errc::invalid_argument, "reset: initial input outside range");
  u_prev_ = u_init;
  warm_ = Vec::Zero(q_);
}

Vec MpcController::step(const Vec& state, const Vec& ref_stack,
                        StepDiagnostics* diag) {
  require(state.size() == n_, Errc::dimension_mismatch, "step: state length");
  require(state.allFinite(), Errc::numeric_failure,
          "step: non-finite state");
  require(ref_stack.size() ==
              static_cast<Index>(cfg_.horizon_pred) * p_,
          Errc::dimension_mismatch, "step: reference stack length");

  LinearizedSystem lin = linearize(model_, state, u_prev_, cfg_.tracked);
  PredictionMatrices pred = build_prediction(
      lin.A, lin.B, lin.C, cfg_.horizon_pred, cfg_.horizon_ctrl);
  CycleQp cq = build_qp(lin, pred, ref_stack, state, u_prev_, cfg_);

  StepDiagnostics local;
  StepDiagnostics& dg = diag ? *diag : local;
  dg = StepDiagnostics{};

  {
    Eigen::SelfAdjointEigenSolver<Mat> es(cq.qp.H);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    dg.hessian_condition =
        lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }

  QpOptions opt = cfg_.qp;
  opt.warm_start = warm_;
  QpSolution sol = solve_fast(cq.qp, opt);
  warm_ = sol.multipliers;

  dg.qp_status = sol.status;
  dg.qp_iterations = sol.iterations;
  dg.kkt_residual = sol.kkt_residual;
  dg.active_mask.assign(static_cast<size_t>(q_), '0');
  for (Index i = 0; i < sol.multipliers.size(); ++i)
    if (sol.multipliers[i] > 1e-8) {
      dg.active_mask[static_cast<size_t>(i)] = '1';
      ++dg.n_active;
    }

  Vec moves;
  if (sol.status == QpStatus::converged) {
    moves = sol.x;
  } else {
    // The input rows are always consistent on their own (the move box
    // contains zero), so retry without the relaxable tail, then hold.
    QpProblem hard = cq.qp;
    hard.A = cq.qp.A.topRows(cq.n_soft_begin).eval();
    hard.b = cq.qp.b.head(cq.n_soft_begin).eval();
    QpOptions cold = cfg_.qp;
    cold.warm_start.reset();
    QpSolution relaxed = solve_fast(hard, cold);
    if (relaxed.status == QpStatus::converged) {
      dg.fallback = 1;
      moves = relaxed.x;
    } else {
      dg.fallback = 2;
      moves = Vec::Zero(cq.qp.H.rows());
    }
  }

  Vec du = moves.head(m_);
  Vec u = u_prev_ + du;
  // Belt-and-braces clamp: the QP already constrains these rows, so any
  // engagement beyond roundoff is surfaced through the diagnostics.
  for (Index i = 0; i < m_; ++i) {
    double v = u[i];
    double lo = std::max(cfg_.u_lo[i], u_prev_[i] + cfg_.du_lo[i]);
    double hi = std::min(cfg_.u_hi[i], u_prev_[i] + cfg_.du_hi[i]);
    u[i] = std::min(std::max(v, lo), hi);
    if (std::abs(u[i] - v) > 1e-12 * (1.0 + std::abs(v))) dg.clamped = true;
  }
  u_prev_ = u;
  return u;
}

} // namespace elmpc
