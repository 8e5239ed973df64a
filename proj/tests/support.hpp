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

// Shared oracles and builders for the test binaries.  Everything here is
// deliberately independent of the implementation under test: finite
// differences instead of the analytic chain, explicit recursions instead
// of condensed matrices, and models assembled from hand-picked weights
// through the public file format instead of the trained path.

#ifndef ELMPC_TESTS_SUPPORT_HPP
#define ELMPC_TESTS_SUPPORT_HPP

#include <unistd.h>

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "core/elm.hpp"
#include "core/mpc.hpp"
#include "core/qp.hpp"
#include "core/textio.hpp"
#include "core/types.hpp"

namespace test_support {

using elmpc::Index;
using elmpc::Mat;
using elmpc::Vec;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Assemble a model with chosen weights by writing the public file format
// and reading it back; the trained path never runs.
inline elmpc::ElmModel make_model(const Mat& wr, const Vec& br, const Mat& w,
                                  const Vec& in_lo, const Vec& in_hi,
                                  const Vec& out_lo, const Vec& out_hi) {
  std::ostringstream os;
  os << "elmpc-model 1\n";
  os << "seed 0\n";
  os << "dims " << wr.rows() << ' ' << w.cols() << ' ' << wr.cols() << '\n';
  os << "trained 1\n";
  elmpc::write_matrix(os, "input_weights", wr);
  elmpc::write_matrix(os, "input_bias", br);
  elmpc::write_matrix(os, "output_weights", w);
  elmpc::write_matrix(os, "input_lo", in_lo);
  elmpc::write_matrix(os, "input_hi", in_hi);
  elmpc::write_matrix(os, "output_lo", out_lo);
  elmpc::write_matrix(os, "output_hi", out_hi);
  std::istringstream is(os.str());
  return elmpc::ElmModel::load(is);
}

// Central differences on predict(); step h in raw input units.
inline Mat fd_jacobian(const elmpc::ElmModel& m, const Vec& x,
                       double h = 1e-6) {
  Mat jac(m.d_out(), m.d_in());
  for (int j = 0; j < m.d_in(); ++j) {
    Vec hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    jac.col(j) = (m.predict(hi) - m.predict(lo)) / (2.0 * h);
  }
  return jac;
}

// A map that is affine to roughly cubic order: hidden units come in
// (w, -w) pairs whose output rows are (v, -v), so the pair contributes
// v * tanh(s w'x / 2) and the curvature scales with s^2.  s = 1e-5 keeps
// the deviation from affine near 1e-10 over the unit box.
inline elmpc::ElmModel near_affine_model(int d_in, int d_out,
                                         std::uint64_t seed,
                                         double s = 1e-5) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int pairs = d_in + 2;
  Mat wr(d_in, 2 * pairs);
  Mat w(2 * pairs, d_out);
  for (int p = 0; p < pairs; ++p) {
    for (int i = 0; i < d_in; ++i) {
      double wi = unit(eng);
      wr(i, 2 * p) = s * wi;
      wr(i, 2 * p + 1) = -s * wi;
    }
    for (int j = 0; j < d_out; ++j) {
      double vj = (4.0 / (s * pairs)) * unit(eng);
      w(2 * p, j) = vj;
      w(2 * p + 1, j) = -vj;
    }
  }
  Vec in_lo = Vec::Constant(d_in, -1.0), in_hi = Vec::Constant(d_in, 1.0);
  Vec out_lo = Vec::Constant(d_out, -2.0), out_hi = Vec::Constant(d_out, 2.0);
  return make_model(wr, Vec::Zero(2 * pairs), w, in_lo, in_hi, out_lo,
                    out_hi);
}

// The same pair construction with chosen coefficients: the result computes
// M x over the unit box up to roughly 1e-10, with inputs stacked before
// states when used as a lag-one transition model.
inline elmpc::ElmModel affine_model(const Mat& M, double s = 1e-5) {
  const Index d_in = M.cols(), d_out = M.rows();
  Mat wr = Mat::Zero(d_in, 2 * d_in);
  Mat w(2 * d_in, d_out);
  for (Index p = 0; p < d_in; ++p) {
    wr(p, 2 * p) = s;
    wr(p, 2 * p + 1) = -s;
    w.row(2 * p) = M.col(p).transpose() / s;
    w.row(2 * p + 1) = -M.col(p).transpose() / s;
  }
  Vec in_lo = Vec::Constant(d_in, -1.0), in_hi = Vec::Constant(d_in, 1.0);
  Vec out_lo = Vec::Constant(d_out, -2.0), out_hi = Vec::Constant(d_out, 2.0);
  return make_model(wr, Vec::Zero(2 * d_in), w, in_lo, in_hi, out_lo,
                    out_hi);
}

// Fit a small model on a smooth random map so the trained path runs for
// real; the data itself is irrelevant to the callers.
inline elmpc::ElmModel random_trained_model(std::uint64_t seed, int d_in,
                                            int d_out, int n_hidden,
                                            int n_samples = 200) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Mat mix(d_out, d_in);
  for (Index i = 0; i < mix.size(); ++i) mix(i) = unit(eng);
  Mat X(n_samples, d_in), Y(n_samples, d_out);
  for (int k = 0; k < n_samples; ++k) {
    for (int j = 0; j < d_in; ++j) X(k, j) = unit(eng);
    Vec t = mix * X.row(k).transpose();
    for (int j = 0; j < d_out; ++j) Y(k, j) = std::tanh(t[j]);
  }
  Vec in_lo = Vec::Constant(d_in, -1.0), in_hi = Vec::Constant(d_in, 1.0);
  Vec out_lo = Vec::Constant(d_out, -1.5), out_hi = Vec::Constant(d_out, 1.5);
  elmpc::ElmModel m(d_in, d_out, n_hidden, seed, in_lo, in_hi, out_lo,
                    out_hi);
  m.train(X, Y, 1e-4);
  return m;
}

// Step-by-step horizon simulation; the condensed matrices must reproduce
// this exactly up to roundoff.
inline Vec simulate_horizon(const Mat& A, const Mat& B, const Mat& C,
                            const Vec& z0, const Vec& u_prev, const Mat& dU,
                            const Vec& bias, const Vec& out_bias,
                            int horizon_pred, int horizon_ctrl) {
  const Index p = C.rows();
  Vec z = z0;
  Vec u = u_prev;
  Vec stacked(horizon_pred * p);
  for (int k = 0; k < horizon_pred; ++k) {
    if (k < horizon_ctrl) u += dU.col(k);
    z = A * z + B * u + bias;
    stacked.segment(k * p, p) = C * z + out_bias;
  }
  return stacked;
}

// Random strictly convex QP with a guaranteed interior feasible point.
inline elmpc::QpProblem random_feasible_qp(std::uint64_t seed, int d_max = 4,
                                           int q_max = 10) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> slack(0.1, 1.0);
  std::uniform_int_distribution<int> dd(1, d_max), dq(0, q_max);
  const int d = dd(eng), q = dq(eng);
  Mat M(d, d);
  for (Index i = 0; i < M.size(); ++i) M(i) = unit(eng);
  elmpc::QpProblem p;
  p.H = M.transpose() * M + Mat::Identity(d, d);
  p.g.resize(d);
  for (int i = 0; i < d; ++i) p.g[i] = unit(eng);
  p.A.resize(q, d);
  p.b.resize(q);
  Vec x0(d);
  for (int i = 0; i < d; ++i) x0[i] = unit(eng);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < d; ++j) p.A(i, j) = unit(eng);
    p.b[i] = p.A.row(i).dot(x0) + slack(eng);
  }
  return p;
}

inline double objective(const elmpc::QpProblem& p, const Vec& x) {
  return 0.5 * x.dot(p.H * x) + p.g.dot(x);
}

// Self-cleaning unique directory for file round-trip tests.
class TempDir {
public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto cand = base / ("elmpc-test-" + std::to_string(::getpid()) + "-" +
                          std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(cand, ec)) {
        path_ = cand;
        return;
      }
    }
    throw std::runtime_error("cannot create a scratch directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  const std::filesystem::path& path() const { return path_; }

private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

} // namespace test_support

#endif
