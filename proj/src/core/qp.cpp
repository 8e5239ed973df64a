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

#include "core/qp.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace elmpc {

namespace {

constexpr double kStepGuard = 1e-9;
constexpr double kStepCap = 1e6;

void check_problem(const QpProblem& p) {
  require(p.H.rows() > 0 && p.H.rows() == p.H.cols(), Errc::dimension_mismatch,
          "qp: H must be square and nonempty");
  require(p.g.size() == p.H.rows(), Errc::dimension_mismatch,
          "qp: g length must match H");
  require(p.A.rows() == p.b.size(), Errc::dimension_mismatch,
          "qp: A row count must match b");
  require(p.A.rows() == 0 || p.A.cols() == p.H.rows(),
          Errc::dimension_mismatch, "qp: A column count must match H");
  require(p.H.allFinite() && p.g.allFinite(), Errc::numeric_failure,
          "qp: non-finite objective");
  require(p.A.size() == 0 || (p.A.allFinite() && p.b.allFinite()),
          Errc::numeric_failure, "qp: non-finite constraints");
}

Eigen::LLT<Mat> factor_hessian(const QpProblem& p) {
  Eigen::LLT<Mat> llt(p.H);
  require(llt.info() == Eigen::Success, Errc::singular_system,
          "qp: H is not positive definite");
  return llt;
}

} // namespace

DualForm assemble_dual(const QpProblem& p) {
  check_problem(p);
  auto llt = factor_hessian(p);
  DualForm d;
  if (p.A.rows() == 0) {
    d.curvature.resize(0, 0);
    d.offset.resize(0);
    return d;
  }
  Mat HiAt = llt.solve(p.A.transpose());
  d.curvature = -(p.A * HiAt);
  // Symmetrize: the product above is symmetric in exact arithmetic.
  d.curvature = 0.5 * (d.curvature + d.curvature.transpose()).eval();
  d.offset = -p.b - p.A * llt.solve(p.g);
  return d;
}

double estimate_step(const Mat& curvature) {
  require(curvature.rows() == curvature.cols(), Errc::dimension_mismatch,
          "estimate_step: curvature must be square");
  const Index q = curvature.rows();
  if (q == 0) return kStepCap;
  Mat M = -curvature; // positive semidefinite
  // Fixed 50-step power iteration from a deterministic pseudo-random
  // start; the Rayleigh quotient of a PSD matrix converges from below.
  Vec v(q);
  std::uint64_t s = 0x243f6a8885a308d3ULL;
  for (Index i = 0; i < q; ++i) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    v[i] = 0.5 + static_cast<double>(s >> 40) * 0x1p-25;
  }
  v.normalize();
  double top = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vec w = M * v;
    double norm = w.norm();
    if (norm <= 0.0 || !std::isfinite(norm)) {
      top = 0.0;
      break;
    }
    v = w / norm;
    top = v.dot(M * v);
  }
  if (!(top > 0.0)) return kStepCap;
  double step = 1.0 / (top + kStepGuard);
  return step > kStepCap ? kStepCap : step;
}

double kkt_residual(const QpProblem& p, const Vec& x, const Vec& mult) {
  double r = 0.0;
  Vec stat = p.H * x + p.g;
  if (p.A.rows() > 0) stat += p.A.transpose() * mult;
  r = stat.cwiseAbs().maxCoeff();
  if (p.A.rows() > 0) {
    Vec slack = p.A * x - p.b;
    r = std::max(r, slack.maxCoeff());             // primal feasibility
    r = std::max(r, (-mult).maxCoeff());           // dual feasibility
    r = std::max(r, mult.cwiseProduct(slack).cwiseAbs().maxCoeff());
  }
  return r;
}

QpSolution solve_fast(const QpProblem& p, const QpOptions& opt) {
  check_problem(p);
  require(opt.tol > 0.0 && opt.max_iter >= 1, Errc::invalid_argument,
          "qp: tol must be > 0 and max_iter >= 1");
  auto llt = factor_hessian(p);
  const Index q = p.A.rows();

  QpSolution sol;
  sol.status = QpStatus::converged;
  if (q == 0) {
    sol.x = llt.solve(-p.g);
    sol.multipliers.resize(0);
    sol.kkt_residual = kkt_residual(p, sol.x, sol.multipliers);
    sol.step_used = 0.0;
    return sol;
  }

  // Row equilibration: scaling row i of (A, b) by 1 / ||A_i|| leaves the
  // feasible set unchanged and keeps the dual spectrum tight when rows mix
  // physical scales.  Multipliers are mapped back on exit.
  Vec row_scale(q);
  for (Index i = 0; i < q; ++i)
    row_scale[i] = std::max(p.A.row(i).norm(), 1e-12);
  Mat As = row_scale.cwiseInverse().asDiagonal() * p.A;
  Vec bs = p.b.cwiseQuotient(row_scale);

  DualForm dual;
  {
    Mat HiAt = llt.solve(As.transpose());
    dual.curvature = -(As * HiAt);
    dual.curvature =
        0.5 * (dual.curvature + dual.curvature.transpose()).eval();
    dual.offset = -bs - HiAt.transpose() * p.g;
  }
  double step = opt.step > 0.0 ? opt.step : estimate_step(dual.curvature);

  Vec y = Vec::Zero(q);
  if (opt.warm_start) {
    require(opt.warm_start->size() == q, Errc::dimension_mismatch,
            "qp: warm start length must equal the constraint count");
    y = opt.warm_start->cwiseProduct(row_scale).cwiseMax(0.0);
  }

  int it = 0;
  double residual = std::numeric_limits<double>::infinity();
  Vec y_mid = y;
  for (; it < opt.max_iter; ++it) {
    if (it == opt.max_iter / 2) y_mid = y;
    Vec grad = dual.curvature * y + dual.offset;
    Vec y_next = (y + step * grad).cwiseMax(0.0);
    require(y_next.allFinite(), Errc::numeric_failure,
            "qp: dual iterate left the representable range");
    residual = (y_next - y).cwiseAbs().maxCoeff();
    y = y_next;
    if (residual <= opt.tol) {
      ++it;
      break;
    }
  }

  sol.multipliers = y.cwiseQuotient(row_scale);
  sol.x = llt.solve(-(p.g + p.A.transpose() * sol.multipliers));
  sol.iterations = it;
  sol.status =
      residual <= opt.tol ? QpStatus::converged : QpStatus::iteration_cap;
  if (sol.status == QpStatus::iteration_cap) {
    // Unbounded dual growth means primal infeasibility.  The growth
    // direction v >= 0 with A^T v = 0 and b^T v < 0 is a Farkas
    // certificate; rows have unit norm here so the tolerances are plain.
    Vec v = (y - y_mid).cwiseMax(0.0);
    double vn = v.cwiseAbs().maxCoeff();
    if (vn > 0.0) {
      v /= vn;
      if ((As.transpose() * v).cwiseAbs().maxCoeff() <= 1e-6 &&
          bs.dot(v) < -1e-6)
        sol.status = QpStatus::infeasible;
    }
  }
  sol.kkt_residual = kkt_residual(p, sol.x, sol.multipliers);
  sol.step_used = step;
  return sol;
}

QpSolution solve_oracle(const QpProblem& p) {
  check_problem(p);
  const Index d = p.H.rows();
  const Index q = p.A.rows();
  require(d <= 6 && q <= 12, Errc::invalid_argument,
          "solve_oracle: only d <= 6, q <= 12 problems are supported");

  const double feas_tol = 1e-9 * (1.0 + (q ? p.b.cwiseAbs().maxCoeff() : 0.0));
  const double dual_tol = 1e-9;

  QpSolution best;
  bool found = false;
  double best_obj = std::numeric_limits<double>::infinity();

  for (unsigned mask = 0; mask < (1u << q); ++mask) {
    int s = __builtin_popcount(mask);
    if (s > d) continue;

    Mat kkt = Mat::Zero(d + s, d + s);
    Vec rhs(d + s);
    kkt.topLeftCorner(d, d) = p.H;
    rhs.head(d) = -p.g;
    int row = 0;
    for (Index i = 0; i < q; ++i) {
      if (!(mask & (1u << i))) continue;
      kkt.block(d + row, 0, 1, d) = p.A.row(i);
      kkt.block(0, d + row, d, 1) = p.A.row(i).transpose();
      rhs[d + row] = p.b[i];
      ++row;
    }

    Eigen::FullPivLU<Mat> lu(kkt);
    if (!lu.isInvertible()) continue; // dependent active rows; a smaller
                                      // independent subset covers this case
    Vec z = lu.solve(rhs);
    Vec x = z.head(d);

    Vec mult = Vec::Zero(q);
    row = 0;
    bool dual_ok = true;
    for (Index i = 0; i < q; ++i) {
      if (!(mask & (1u << i))) continue;
      double m = z[d + row++];
      if (m < -dual_tol) {
        dual_ok = false;
        break;
      }
      mult[i] = m < 0.0 ? 0.0 : m;
    }
    if (!dual_ok) continue;

    if (q > 0 && ((p.A * x - p.b).array() > feas_tol).any()) continue;

    double obj = 0.5 * x.dot(p.H * x) + p.g.dot(x);
    if (!found || obj < best_obj) {
      found = true;
      best_obj = obj;
      best.x = x;
      best.multipliers = mult;
    }
  }

  if (!found) {
    best.x = Vec::Zero(d);
    best.multipliers = Vec::Zero(q);
    best.status = QpStatus::infeasible;
    best.kkt_residual = std::numeric_limits<double>::infinity();
    return best;
  }
  best.status = QpStatus::converged;
  best.iterations = 0;
  best.kkt_residual = kkt_residual(p, best.x, best.multipliers);
  return best;
}

void dump_qp(const QpProblem& p, const std::string& path) {
  check_problem(p);
  std::ofstream os(path);
  require(os.good(), Errc::io_error, "cannot open for write: " + path);
  os << "elmpc-qp 1\n";
  os << "dims " << p.H.rows() << ' ' << p.A.rows() << '\n';
  write_matrix(os, "hessian", p.H);
  write_matrix(os, "gradient", p.g);
  write_matrix(os, "constraints", p.A);
  write_matrix(os, "limits", p.b);
  os.flush();
  require(os.good(), Errc::io_error, "write failed: " + path);
}

QpProblem load_qp(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), Errc::io_error, "cannot open: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
          "empty QP file");
  require(split_ws(line) == std::vector<std::string>{"elmpc-qp", "1"},
          Errc::parse_error, "not an elmpc QP file (want version 1)");
  require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
          "truncated QP file");
  auto t = split_ws(line);
  require(t.size() == 3 && t[0] == "dims", Errc::parse_error,
          "expected dims line");
  long d = parse_long(t[1]), q = parse_long(t[2]);
  QpProblem p;
  p.H = read_matrix(is, "hessian");
  p.g = read_matrix(is, "gradient").col(0);
  p.A = read_matrix(is, "constraints");
  Mat b = read_matrix(is, "limits");
  p.b = b.rows() > 0 ? Vec(b.col(0)) : Vec(0);
  require(p.H.rows() == d && p.A.rows() == q, Errc::parse_error,
          "QP file shapes inconsistent with dims");
  check_problem(p);
  return p;
}

} // namespace elmpc
