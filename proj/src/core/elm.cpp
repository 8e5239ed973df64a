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

#include "core/elm.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/textio.hpp"

namespace elmpc {

Mat train_ridge(const RidgeProblem& p) {
  require(p.H.rows() == p.Y.rows(), Errc::dimension_mismatch,
          "train_ridge: H and Y row counts differ");
  require(p.H.rows() > 0 && p.H.cols() > 0, Errc::invalid_argument,
          "train_ridge: empty problem");
  require(p.lambda >= 0.0 && std::isfinite(p.lambda), Errc::invalid_argument,
          "train_ridge: lambda must be finite and >= 0");
  require(p.H.allFinite() && p.Y.allFinite(), Errc::numeric_failure,
          "train_ridge: non-finite data");

  Mat gram = p.H.transpose() * p.H;
  gram.diagonal().array() += p.lambda;
  Mat rhs = p.H.transpose() * p.Y;

  Eigen::LDLT<Mat> fac(gram);
  require(fac.info() == Eigen::Success, Errc::singular_system,
          "train_ridge: factorization failed");
  if (p.lambda == 0.0) {
    // LDLT applies a pseudo-inverse to zero pivots without raising a flag,
    // and a rank-deficient Gram system is still consistent, so the residual
    // alone would let an underdetermined unregularized fit through.
    const Vec piv = fac.vectorD().cwiseAbs();
    require(piv.minCoeff() > 1e-12 * piv.maxCoeff(), Errc::singular_system,
            "train_ridge: gram matrix is rank deficient at lambda 0");
  }
  Mat W = fac.solve(rhs);
  W += fac.solve(rhs - gram * W); // one refinement step tightens the residual

  // A rank-deficient Gram matrix (possible only with lambda = 0) slips
  // through LDLT without an error flag, so certify the solve explicitly.
  double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
  double residual = (gram * W - rhs).cwiseAbs().maxCoeff();
  require(std::isfinite(residual) && residual <= 1e-8 * scale,
          Errc::singular_system,
          "train_ridge: normal equations numerically singular "
          "(residual " + format_double(residual) + ")");
  return W;
}

namespace {

void check_bounds_pair(const Vec& lo, const Vec& hi, const char* what) {
  require(lo.size() == hi.size(), Errc::dimension_mismatch,
          std::string("bound vectors differ in length: ") + what);
  for (Index i = 0; i < lo.size(); ++i) {
    require(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i],
            Errc::invalid_argument,
            std::string(what) + ": need lo < hi per channel");
  }
}

} // namespace

ElmModel::ElmModel(int d_in, int d_out, int n_hidden, std::uint64_t seed,
                   const Vec& in_lo, const Vec& in_hi, const Vec& out_lo,
                   const Vec& out_hi)
    : input_lo_(in_lo), input_hi_(in_hi), output_lo_(out_lo),
      output_hi_(out_hi), seed_(seed) {
  require(d_in > 0 && d_out > 0 && n_hidden > 0, Errc::invalid_argument,
          "model dimensions must be positive");
  require(in_lo.size() == d_in && out_lo.size() == d_out,
          Errc::dimension_mismatch, "bound lengths do not match dimensions");
  check_bounds_pair(in_lo, in_hi, "input bounds");
  check_bounds_pair(out_lo, out_hi, "output bounds");

  input_weights_.resize(d_in, n_hidden);
  input_bias_.resize(n_hidden);
  output_weights_ = Mat::Zero(n_hidden, d_out);
  Rng rng(seed);
  for (int j = 0; j < n_hidden; ++j)
    for (int i = 0; i < d_in; ++i) input_weights_(i, j) = rng.uniform(-1.0, 1.0);
  for (int j = 0; j < n_hidden; ++j) input_bias_[j] = rng.uniform(-1.0, 1.0);
}

ElmModel::ElmModel(const ElmModel& o)
    : input_weights_(o.input_weights_), input_bias_(o.input_bias_),
      output_weights_(o.output_weights_), input_lo_(o.input_lo_),
      input_hi_(o.input_hi_), output_lo_(o.output_lo_),
      output_hi_(o.output_hi_), seed_(o.seed_), trained_(o.trained_),
      extrapolations_(o.extrapolations()) {}

ElmModel& ElmModel::operator=(const ElmModel& o) {
  if (this == &o) return *this;
  input_weights_ = o.input_weights_;
  input_bias_ = o.input_bias_;
  output_weights_ = o.output_weights_;
  input_lo_ = o.input_lo_;
  input_hi_ = o.input_hi_;
  output_lo_ = o.output_lo_;
  output_hi_ = o.output_hi_;
  seed_ = o.seed_;
  trained_ = o.trained_;
  extrapolations_.store(o.extrapolations(), std::memory_order_relaxed);
  return *this;
}

void ElmModel::check_ready() const {
  require(input_weights_.size() > 0, Errc::invalid_argument,
          "model not initialized");
}

Vec ElmModel::normalize_input(const Vec& x) const {
  check_ready();
  require(x.size() == d_in(), Errc::dimension_mismatch,
          "normalize_input: wrong length");
  bool outside = false;
  Vec xn(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    xn[i] = 2.0 * (x[i] - input_lo_[i]) / (input_hi_[i] - input_lo_[i]) - 1.0;
    if (x[i] < input_lo_[i] || x[i] > input_hi_[i]) outside = true;
  }
  if (outside) extrapolations_.fetch_add(1, std::memory_order_relaxed);
  return xn;
}

Vec ElmModel::normalize_output(const Vec& z) const {
  check_ready();
  require(z.size() == d_out(), Errc::dimension_mismatch,
          "normalize_output: wrong length");
  return (2.0 * (z - output_lo_).array() /
          (output_hi_ - output_lo_).array() - 1.0)
      .matrix();
}

Vec ElmModel::denormalize_output(const Vec& zn) const {
  check_ready();
  require(zn.size() == d_out(), Errc::dimension_mismatch,
          "denormalize_output: wrong length");
  return output_lo_.array() +
         (output_hi_ - output_lo_).array() / 2.0 * (1.0 + zn.array());
}

Vec ElmModel::hidden(const Vec& x) const {
  Vec a = input_weights_.transpose() * normalize_input(x) + input_bias_;
  for (Index i = 0; i < a.size(); ++i) a[i] = sigmoid(a[i]);
  return a;
}

void ElmModel::train(const Mat& X, const Mat& Y, double lambda) {
  check_ready();
  require(X.cols() == d_in() && Y.cols() == d_out(), Errc::dimension_mismatch,
          "train: data width does not match model dimensions");
  require(X.rows() == Y.rows() && X.rows() > 0, Errc::invalid_argument,
          "train: need matching, nonempty X and Y");
  RidgeProblem p;
  p.H.resize(X.rows(), n_hidden());
  p.Y.resize(Y.rows(), d_out());
  for (Index k = 0; k < X.rows(); ++k) {
    p.H.row(k) = hidden(X.row(k).transpose()).transpose();
    p.Y.row(k) = normalize_output(Y.row(k).transpose()).transpose();
  }
  p.lambda = lambda;
  output_weights_ = train_ridge(p);
  trained_ = true;
}

Vec ElmModel::predict(const Vec& x) const {
  require(trained_, Errc::untrained_model, "predict: model not trained");
  return denormalize_output(output_weights_.transpose() * hidden(x));
}

Mat ElmModel::jacobian(const Vec& x) const {
  require(trained_, Errc::untrained_model, "jacobian: model not trained");
  Vec phi = hidden(x);
  // Chain rule through denormalize o W' o sigmoid o affine o normalize:
  // each factor is diagonal except the two weight matrices.
  Vec gate = (phi.array() * (1.0 - phi.array())).matrix();
  Vec out_scale = (output_hi_ - output_lo_) / 2.0;
  Vec in_scale =
      (2.0 * (input_hi_ - input_lo_).cwiseInverse().array()).matrix();
  Mat j = out_scale.asDiagonal() * output_weights_.transpose() *
          gate.asDiagonal() * input_weights_.transpose() *
          in_scale.asDiagonal();
  return j;
}

void ElmModel::save(std::ostream& os) const {
  check_ready();
  os << "elmpc-model 1\n";
  os << "seed " << seed_ << '\n';
  os << "dims " << d_in() << ' ' << d_out() << ' ' << n_hidden() << '\n';
  os << "trained " << (trained_ ? 1 : 0) << '\n';
  write_matrix(os, "input_weights", input_weights_);
  write_matrix(os, "input_bias", input_bias_);
  write_matrix(os, "output_weights", output_weights_);
  write_matrix(os, "input_lo", input_lo_);
  write_matrix(os, "input_hi", input_hi_);
  write_matrix(os, "output_lo", output_lo_);
  write_matrix(os, "output_hi", output_hi_);
}

void ElmModel::save(const std::string& path) const {
  std::ofstream os(path);
  require(os.good(), Errc::io_error, "cannot open for write: " + path);
  save(os);
  os.flush();
  require(os.good(), Errc::io_error, "write failed: " + path);
}

ElmModel ElmModel::load(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
          "empty model file");
  require(split_ws(line) == std::vector<std::string>{"elmpc-model", "1"},
          Errc::parse_error, "not an elmpc model file (want version 1)");

  require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
          "truncated model file");
  auto t = split_ws(line);
  require(t.size() == 2 && t[0] == "seed", Errc::parse_error,
          "expected seed line");
  std::uint64_t seed = std::stoull(t[1]);

  require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
          "truncated model file");
  t = split_ws(line);
  require(t.size() == 4 && t[0] == "dims", Errc::parse_error,
          "expected dims line");
  long d_in = parse_long(t[1]), d_out = parse_long(t[2]),
       n_h = parse_long(t[3]);

  require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
          "truncated model file");
  t = split_ws(line);
  require(t.size() == 2 && t[0] == "trained", Errc::parse_error,
          "expected trained line");
  bool trained = parse_long(t[1]) != 0;

  Mat wr = read_matrix(is, "input_weights");
  Mat br = read_matrix(is, "input_bias");
  Mat w = read_matrix(is, "output_weights");
  Mat in_lo = read_matrix(is, "input_lo");
  Mat in_hi = read_matrix(is, "input_hi");
  Mat out_lo = read_matrix(is, "output_lo");
  Mat out_hi = read_matrix(is, "output_hi");
  require(wr.rows() == d_in && wr.cols() == n_h && br.rows() == n_h &&
              br.cols() == 1 && w.rows() == n_h && w.cols() == d_out &&
              in_lo.rows() == d_in && in_hi.rows() == d_in &&
              out_lo.rows() == d_out && out_hi.rows() == d_out,
          Errc::parse_error, "model file shapes inconsistent with dims");

  ElmModel m(static_cast<int>(d_in), static_cast<int>(d_out),
             static_cast<int>(n_h), seed, in_lo.col(0), in_hi.col(0),
             out_lo.col(0), out_hi.col(0));
  // The stored weights override the seed-derived draw, so files edited or
  // produced elsewhere still load faithfully.
  m.input_weights_ = wr;
  m.input_bias_ = br.col(0);
  m.output_weights_ = w;
  m.trained_ = trained;
  return m;
}

ElmModel ElmModel::load(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), Errc::io_error, "cannot open: " + path);
  return load(static_cast<std::istream&>(is));
}

StateSpaceSplit split_ab(const Mat& jac, int n_states, int n_inputs) {
  require(n_states > 0 && n_inputs > 0, Errc::invalid_argument,
          "split_ab: dimensions must be positive");
  require(jac.rows() == n_states && jac.cols() == n_states + n_inputs,
          Errc::dimension_mismatch,
          "split_ab: jacobian must be n_states x (n_inputs + n_states)");
  StateSpaceSplit s;
  s.B = jac.leftCols(n_inputs);
  s.A = jac.rightCols(n_states);
  return s;
}

} // namespace elmpc
