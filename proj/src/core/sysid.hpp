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

// Identification of discrete MIMO dynamics from sequence data: excitation
// design, lagged regressor framing, one-step and free-running evaluation,
// and hyper-parameter selection by chronological cross-validation.

#ifndef ELMPC_CORE_SYSID_HPP
#define ELMPC_CORE_SYSID_HPP

#include <cstdint>
#include <vector>

#include "core/elm.hpp"
#include "core/types.hpp"

namespace elmpc {

// Amplitude-modulated pseudo-random excitation.  Channels are independent
// piecewise-constant streams (stream c is seeded with mix_seed(seed, c)):
// levels uniform in [lo_c, hi_c], hold lengths uniform in
// [hold_min, hold_max] cycles.
struct AprbsSpec {
  Vec level_lo, level_hi;
  int hold_min = 1, hold_max = 1;
  std::uint64_t seed = 0;
};

Mat gen_aprbs(const AprbsSpec& spec, int length);

struct NarxConfig {
  int input_dim = 0, output_dim = 0;
  int input_lags = 1, output_lags = 1; // both >= 1
  int feature_dim() const { return input_dim * input_lags + output_dim * output_lags; }
  int window() const { return input_lags > output_lags ? input_lags : output_lags; }
};

struct NarxDataset {
  Mat X; // rows of lagged regressors
  Mat Y; // matching targets
  NarxConfig cfg;
  int first_target = 0; // sequence index of the first framed target row
};

// Regressor for target index k of a sequence pair:
// [u(k-1)..u(k-input_lags), y(k-1)..y(k-output_lags)].
Vec narx_features(const NarxConfig& cfg, const Mat& u, const Mat& y, int k);

// Frame a full sequence pair (u: T x input_dim, y: T x output_dim) into
// X (N x feature_dim) and Y (N x output_dim) with
// N = T - max(input_lags, output_lags).
NarxDataset build_narx(const Mat& u, const Mat& y, const NarxConfig& cfg);

// One-step-ahead RMSE in normalized output units:
// sqrt(mean over rows of sum over channels of squared normalized error).
double evaluate_osap(const ElmModel& m, const NarxDataset& data);

// Free-running prediction: model outputs are fed back in place of
// measurements.  u_seq has input_lags + n_pred - 1 rows (rows before index
// input_lags are the pre-roll inputs); y_hist has >= output_lags rows, of
// which the last output_lags are used.  Returns n_pred x output_dim.
Mat rollout_msap(const ElmModel& m, const NarxConfig& cfg, const Mat& u_seq,
                 const Mat& y_hist, int n_pred);

// Free-running RMSE in normalized units.  The predictable range is covered
// by consecutive `horizon`-step rollouts, each restarted from measured lags,
// so every target row is predicted once and horizon 1 equals the one-step
// evaluation bitwise.
double evaluate_msap(const ElmModel& m, const NarxConfig& cfg, const Mat& u,
                     const Mat& y, int horizon);

// Frame, derive normalization bounds from the framed data (per-column
// min/max, degenerate channels padded), and fit.
ElmModel train_narx(const Mat& u, const Mat& y, const NarxConfig& cfg,
                    int n_hidden, double lambda, std::uint64_t seed);

struct CvCandidate {
  int n_hidden = 0;
  double lambda = 0.0;
  int order = 1; // applied to input and output lags alike
};

struct CvScore {
  CvCandidate cand;
  double rmse = 0.0;
};

struct CvResult {
  CvCandidate best;
  std::vector<CvScore> table; // grid order: n_hidden, lambda, order
  int split_index = 0;        // first cycle of the scoring segment
  int total_length = 0;
};

// Chronological split: fit on cycles [0, split_index), score one-step-ahead
// on cycles [split_index, T).  Ties prefer fewer neurons, then lower order,
// then larger lambda.  Candidates are scored concurrently.
CvResult cross_validate(const Mat& u, const Mat& y,
                        const std::vector<int>& n_hidden_grid,
                        const std::vector<double>& lambda_grid,
                        const std::vector<int>& order_grid,
                        double split_fraction, std::uint64_t seed);

} // namespace elmpc

#endif
