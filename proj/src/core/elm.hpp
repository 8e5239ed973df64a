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

// Extreme learning machine: a single hidden sigmoid layer with weights and
// biases drawn once from a seeded uniform [-1, 1] and never trained, plus a
// ridge-fitted linear output layer.  Inputs are affinely mapped to [-1, 1]
// and outputs back from [-1, 1] using per-channel bounds stored with the
// model, so the fitted layer always works on normalized quantities:
//
//   predict(x) = out_lo + (out_hi - out_lo)/2 .* (1 + W' * phi(x)),
//   phi(x)     = sigmoid(Wr' * norm(x) + br).

#ifndef ELMPC_CORE_ELM_HPP
#define ELMPC_CORE_ELM_HPP

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include "core/types.hpp"

namespace elmpc {

inline double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  double e = std::exp(a);
  return e / (1.0 + e);
}

// Ridge regression  min ||H W - Y||^2 + lambda ||W||^2  over W.
struct RidgeProblem {
  Mat H; // n_samples x n_features
  Mat Y; // n_samples x n_outputs
  double lambda = 0.0;
};

// Solves the regularized normal equations (H'H + lambda I) W = H'Y through
// a symmetric factorization; the inverse is never formed.  lambda = 0 is
// accepted only when the Gram matrix is numerically nonsingular, verified
// through the factorization's pivots and the residual of the solved
// system.
Mat train_ridge(const RidgeProblem& p);

class ElmModel {
public:
  ElmModel() = default;

  // Weights uniform in [-1, 1]: Wr column by column, then br.  Bounds must
  // satisfy lo < hi elementwise.
  ElmModel(int d_in, int d_out, int n_hidden, std::uint64_t seed,
           const Vec& in_lo, const Vec& in_hi, const Vec& out_lo,
           const Vec& out_hi);

  ElmModel(const ElmModel& o);
  ElmModel& operator=(const ElmModel& o);

  int d_in() const { return static_cast<int>(input_weights_.rows()); }
  int d_out() const { return static_cast<int>(output_lo_.size()); }
  int n_hidden() const { return static_cast<int>(input_weights_.cols()); }
  bool trained() const { return trained_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t param_count() const {
    return static_cast<std::int64_t>(n_hidden()) * (d_in() + d_out()) +
           n_hidden();
  }

  const Vec& in_lo() const { return input_lo_; }
  const Vec& in_hi() const { return input_hi_; }
  const Vec& out_lo() const { return output_lo_; }
  const Vec& out_hi() const { return output_hi_; }
  const Mat& input_weights() const { return input_weights_; }
  const Vec& input_bias() const { return input_bias_; }
  const Mat& output_weights() const { return output_weights_; }

  // Affine map of a raw input onto [-1, 1] per channel.  Points outside
  // the box are extrapolated, not clipped; each such call bumps the
  // extrapolation counter.
  Vec normalize_input(const Vec& x) const;
  Vec normalize_output(const Vec& z) const;
  Vec denormalize_output(const Vec& zn) const;

  // Hidden activations for a raw input, length n_hidden, each in (0, 1).
  Vec hidden(const Vec& x) const;

  // Fit the output layer: H from rows of X, targets normalized, then
  // ridge.  X is n x d_in, Y is n x d_out.
  void train(const Mat& X, const Mat& Y, double lambda);

  Vec predict(const Vec& x) const;

  // Exact derivative of predict: d_out x d_in.
  Mat jacobian(const Vec& x) const;

  std::uint64_t extrapolations() const {
    return extrapolations_.load(std::memory_order_relaxed);
  }

  void save(const std::string& path) const;
  void save(std::ostream& os) const;
  static ElmModel load(const std::string& path);
  static ElmModel load(std::istream& is);

private:
  void check_ready() const;

  Mat input_weights_;  // d_in x n_hidden, fixed at construction
  Vec input_bias_;     // n_hidden
  Mat output_weights_; // n_hidden x d_out, set by train()
  Vec input_lo_, input_hi_;
  Vec output_lo_, output_hi_;
  std::uint64_t seed_ = 0;
  bool trained_ = false;
  mutable std::atomic<std::uint64_t> extrapolations_{0};
};

// Split the derivative of a lag-one transition model into the state-space
// pair: columns of J are ordered [input block | state block], so B is the
// first n_inputs columns and A the remaining n_states columns.
struct StateSpaceSplit {
  Mat A; // n_states x n_states
  Mat B; // n_states x n_inputs
};

StateSpaceSplit split_ab(const Mat& jac, int n_states, int n_inputs);

} // namespace elmpc

#endif
