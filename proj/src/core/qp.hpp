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

// Dense convex quadratic programming:
//
//   minimize   0.5 x'Hx + g'x   subject to   Ax <= b,
//
// H symmetric positive definite.  The production path (solve_fast) runs
// projected gradient ascent on the dual, which needs only one factorization
// of H plus matrix-vector products per iteration and maps directly onto
// embedded targets.  solve_oracle enumerates active sets exhaustively and
// exists purely to check solve_fast; the two share no solution code.

#ifndef ELMPC_CORE_QP_HPP
#define ELMPC_CORE_QP_HPP

#include <optional>
#include <string>

#include "core/types.hpp"

namespace elmpc {

struct QpProblem {
  Mat H; // d x d, symmetric positive definite
  Vec g; // d
  Mat A; // q x d, q >= 0
  Vec b; // q
};

struct QpOptions {
  double step = 0.0;  // dual ascent step; <= 0 selects 1/max-curvature
  double tol = 1e-8;  // fixed-point residual on the projected iterate
  int max_iter = 20000;
  std::optional<Vec> warm_start; // dual start, length q
};

enum class QpStatus { converged, iteration_cap, infeasible };

struct QpSolution {
  Vec x;
  Vec multipliers; // length q, >= 0
  int iterations = 0;
  QpStatus status = QpStatus::converged;
  double kkt_residual = 0.0; // max KKT violation at the returned iterate
  double step_used = 0.0;
};

// Negated dual quadratic: the dual of the QP above is
//   maximize  0.5 y'Dy + c'y  over  y >= 0,
// with D = -A H^-1 A' (symmetric negative semidefinite) and
// c = -b - A H^-1 g.
struct DualForm {
  Mat curvature; // D
  Vec offset;    // c
};

DualForm assemble_dual(const QpProblem& p);

// 1 / (largest eigenvalue of -curvature + guard), estimated with 50 fixed
// power-iteration steps; capped at 1e6 for (near-)zero curvature.
double estimate_step(const Mat& curvature);

// Projected dual gradient ascent.  Constraint rows are normalized to unit
// length internally (the iteration and any explicit `step` act on the
// scaled dual); returned multipliers and the KKT residual refer to the
// problem as given.  A Farkas direction found at the iteration cap turns
// the status into `infeasible`.
QpSolution solve_fast(const QpProblem& p, const QpOptions& opt = {});

// Exhaustive reference solver, limited to d <= 6 and q <= 12.
QpSolution solve_oracle(const QpProblem& p);

// Worst KKT violation of (x, multipliers) for problem p: max of
// stationarity, primal feasibility, dual feasibility, complementarity.
double kkt_residual(const QpProblem& p, const Vec& x, const Vec& mult);

void dump_qp(const QpProblem& p, const std::string& path);
QpProblem load_qp(const std::string& path);

} // namespace elmpc

#endif
