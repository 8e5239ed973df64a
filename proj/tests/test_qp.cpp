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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/qp.hpp"
#include "support.hpp"

using namespace elmpc;
using test_support::objective;
using test_support::random_feasible_qp;
using test_support::TempDir;
using test_support::vec;

namespace {

QpProblem unconstrained(const Mat& h, const Vec& g) {
  QpProblem p;
  p.H = h;
  p.g = g;
  p.A.resize(0, h.rows());
  p.b.resize(0);
  return p;
}

// min 0.5 x^2 + w x  subject to  x <= cap
QpProblem clamp_problem(double w, double cap) {
  QpProblem p;
  p.H = Mat::Constant(1, 1, 1.0);
  p.g = Vec::Constant(1, w);
  p.A = Mat::Constant(1, 1, 1.0);
  p.b = Vec::Constant(1, cap);
  return p;
}

} // namespace

TEST_CASE("unconstrained problems reduce to the normal equations") {
  Mat h(2, 2);
  h << 4, 1, 1, 3;
  Vec g = vec({-1.0, 2.0});
  QpProblem p = unconstrained(h, g);
  Vec want = h.ldlt().solve(-g);
  QpSolution fast = solve_fast(p);
  CHECK(fast.status == QpStatus::converged);
  CHECK((fast.x - want).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fast.multipliers.size() == 0);
  QpSolution oracle = solve_oracle(p);
  CHECK((oracle.x - want).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("the dual form matches its definition") {
  SUBCASE("identity data gives negated identity curvature") {
    QpProblem p;
    p.H = Mat::Identity(2, 2);
    p.g = Vec::Zero(2);
    p.A = Mat::Identity(2, 2);
    p.b = vec({1.0, 2.0});
    DualForm d = assemble_dual(p);
    CHECK((d.curvature + Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <=
          1e-14);
    CHECK((d.offset + p.b).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("curvature is symmetric negative semidefinite") {
    for (unsigned seed = 0; seed < 20; ++seed) {
      QpProblem p = random_feasible_qp(seed);
      if (p.A.rows() == 0) continue;
      DualForm d = assemble_dual(p);
      CHECK((d.curvature - d.curvature.transpose()).cwiseAbs().maxCoeff() <=
            1e-12);
      Eigen::SelfAdjointEigenSolver<Mat> es(d.curvature);
      CHECK(es.eigenvalues().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("the step heuristic tracks the dominant curvature") {
  SUBCASE("unit spectrum") {
    Mat d = -Mat::Identity(3, 3);
    CHECK(estimate_step(d) == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("dominant eigenvalue four") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = -4.0;
    d(1, 1) = -1.0;
    CHECK(estimate_step(d) == doctest::Approx(0.25).epsilon(1e-6));
  }
  SUBCASE("within one percent of a dense eigensolver") {
    std::mt19937_64 eng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      int n = 3 + trial;
      Mat m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = gauss(eng);
      Mat d = -(m.transpose() * m);
      Eigen::SelfAdjointEigenSolver<Mat> es(-d);
      double want = 1.0 / (es.eigenvalues().maxCoeff() + 1e-9);
      CHECK(estimate_step(d) == doctest::Approx(want).epsilon(0.01));
    }
  }
  SUBCASE("zero curvature caps the step") {
    CHECK(estimate_step(Mat::Zero(2, 2)) <= 1e6 + 1.0);
    CHECK(estimate_step(Mat::Zero(2, 2)) > 1e5);
  }
}

TEST_CASE("a single bound clamps the scalar minimizer") {
  for (double w : {-2.0, -0.5, 0.0, 1.5}) {
    for (double cap : {-1.0, 0.0, 0.3, 5.0}) {
      QpSolution s = solve_fast(clamp_problem(w, cap));
      CHECK(s.status == QpStatus::converged);
      CHECK(s.x[0] ==
            doctest::Approx(std::min(-w, cap)).epsilon(1e-8));
      CHECK(s.kkt_residual <= 1e-6);
    }
  }
}

TEST_CASE("a controller-sized problem converges") {
  std::mt19937_64 eng(91);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = 9, q = 48;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = gauss(eng);
  QpProblem p;
  p.H = m.transpose() * m + Mat::Identity(d, d);
  p.g.resize(d);
  for (int i = 0; i < d; ++i) p.g[i] = gauss(eng);
  p.A.resize(q, d);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < d; ++j) p.A(i, j) = gauss(eng);
  Vec interior(d);
  for (int i = 0; i < d; ++i) interior[i] = 0.1 * gauss(eng);
  p.b = p.A * interior + Vec::Constant(q, 0.5);
  QpSolution s = solve_fast(p);
  CHECK(s.status == QpStatus::converged);
  CHECK(s.kkt_residual <= 1e-6);
  CHECK((p.A * s.x - p.b).maxCoeff() <= 1e-6);
}

TEST_CASE("fast solver and reference solver agree") {
  SUBCASE("two-variable box around a shifted target") {
    // min 0.5||x - t||^2 with -1 <= x <= 1; solution clamps t.
    Vec t = vec({2.0, -0.4});
    QpProblem p;
    p.H = Mat::Identity(2, 2);
    p.g = -t;
    p.A.resize(4, 2);
    p.A << 1, 0, 0, 1, -1, 0, 0, -1;
    p.b = Vec::Ones(4);
    QpSolution fast = solve_fast(p);
    QpSolution oracle = solve_oracle(p);
    Vec want = vec({1.0, -0.4});
    CHECK((fast.x - want).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((oracle.x - want).cwiseAbs().maxCoeff() <= 1e-10);
    // With a binding row the objective error is first order in the primal
    // error, so the gap inherits the iterate accuracy.
    CHECK(std::abs(objective(p, fast.x) - objective(p, oracle.x)) <= 1e-6);
  }
  SUBCASE("random feasible instances") {
    for (unsigned seed = 100; seed < 160; ++seed) {
      QpProblem p = random_feasible_qp(seed);
      QpSolution fast = solve_fast(p);
      QpSolution oracle = solve_oracle(p);
      REQUIRE(fast.status == QpStatus::converged);
      double scale = 1.0 + std::abs(objective(p, oracle.x));
      CHECK(objective(p, fast.x) - objective(p, oracle.x) <=
            1e-6 * scale);
      CHECK((fast.x - oracle.x).cwiseAbs().maxCoeff() <= 1e-4);
    }
  }
}

TEST_CASE("contradictory constraints are reported infeasible") {
  // x <= 0 and x >= 1 cannot hold together.
  QpProblem p;
  p.H = Mat::Identity(1, 1);
  p.g = Vec::Zero(1);
  p.A.resize(2, 1);
  p.A << 1, -1;
  p.b = vec({0.0, -1.0});
  QpSolution s = solve_fast(p);
  CHECK(s.status == QpStatus::infeasible);

  // Relaxing the second row restores feasibility at the origin.
  p.b[1] = 0.0;
  QpSolution ok = solve_fast(p);
  CHECK(ok.status == QpStatus::converged);
  CHECK(std::abs(ok.x[0]) <= 1e-8);
}

TEST_CASE("returned multipliers are exactly nonnegative") {
  for (unsigned seed = 40; seed < 60; ++seed) {
    QpProblem p = random_feasible_qp(seed);
    QpSolution s = solve_fast(p);
    if (s.multipliers.size() > 0)
      CHECK(s.multipliers.minCoeff() >= 0.0);
  }
}

TEST_CASE("projected ascent never decreases the dual objective") {
  QpProblem p = random_feasible_qp(7, 4, 8);
  REQUIRE(p.A.rows() > 0);
  DualForm d = assemble_dual(p);
  double step = estimate_step(d.curvature);
  auto dual_value = [&](const Vec& y) {
    return 0.5 * y.dot(d.curvature * y) + d.offset.dot(y);
  };
  Vec y = Vec::Zero(p.A.rows());
  double prev = dual_value(y);
  for (int it = 0; it < 200; ++it) {
    y = (y + step * (d.curvature * y + d.offset)).cwiseMax(0.0);
    double cur = dual_value(y);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
}

TEST_CASE("warm starts reproduce the cold answer faster") {
  for (unsigned seed = 300; seed < 310; ++seed) {
    QpProblem p = random_feasible_qp(seed);
    if (p.A.rows() == 0) continue;
    QpSolution cold = solve_fast(p);
    REQUIRE(cold.status == QpStatus::converged);
    QpOptions opt;
    opt.warm_start = cold.multipliers;
    QpSolution warm = solve_fast(p, opt);
    CHECK(warm.status == QpStatus::converged);
    CHECK((warm.x - cold.x).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(warm.iterations <= cold.iterations);
  }
}

TEST_CASE("an explicit step is honored and echoed") {
  QpProblem p = clamp_problem(-2.0, 0.5);
  QpOptions opt;
  opt.step = 0.125;
  QpSolution s = solve_fast(p, opt);
  CHECK(s.step_used == 0.125);
  // The fixed-point stopping rule leaves a primal error near tol / step,
  // so a small explicit step loosens the solution accordingly.
  CHECK(s.x[0] == doctest::Approx(0.5).epsilon(1e-6));
  QpSolution autos = solve_fast(p);
  CHECK(autos.step_used > 0.0);
}

TEST_CASE("ill-posed inputs are rejected") {
  SUBCASE("indefinite curvature") {
    QpProblem p = unconstrained(-Mat::Identity(2, 2), Vec::Zero(2));
    CHECK_THROWS_AS(solve_fast(p), Error);
  }
  SUBCASE("mismatched shapes") {
    QpProblem p = clamp_problem(0.0, 1.0);
    p.b.resize(2);
    CHECK_THROWS_AS(solve_fast(p), Error);
  }
  SUBCASE("oracle size limit") {
    QpProblem p;
    const int d = 7;
    p.H = Mat::Identity(d, d);
    p.g = Vec::Zero(d);
    p.A.resize(0, d);
    p.b.resize(0);
    CHECK_THROWS_AS(solve_oracle(p), Error);
  }
}

TEST_CASE("problems round-trip through their file form") {
  TempDir dir;
  QpProblem p = random_feasible_qp(5);
  std::string path = dir.file("problem.qp");
  dump_qp(p, path);
  QpProblem back = load_qp(path);
  CHECK(back.H == p.H);
  CHECK(back.g == p.g);
  CHECK(back.A == p.A);
  CHECK(back.b == p.b);
  CHECK_THROWS_AS(load_qp(dir.file("missing.qp")), Error);
}
