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

#include "core/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace elmpc {

Mat gen_aprbs(const AprbsSpec& spec, int length) {
  const Index channels = spec.level_lo.size();
  require(channels > 0 && spec.level_hi.size() == channels,
          Errc::dimension_mismatch, "gen_aprbs: level bounds mismatched");
  require(length > 0, Errc::invalid_argument, "gen_aprbs: length must be > 0");
  require(spec.hold_min >= 1 && spec.hold_max >= spec.hold_min,
          Errc::invalid_argument, "gen_aprbs: need 1 <= hold_min <= hold_max");
  for (Index c = 0; c < channels; ++c)
    require(spec.level_lo[c] <= spec.level_hi[c], Errc::invalid_argument,
            "gen_aprbs: level_lo > level_hi");

  Mat out(length, channels);
  for (Index c = 0; c < channels; ++c) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(c)));
    int k = 0;
    while (k < length) {
      double level = rng.uniform(spec.level_lo[c], spec.level_hi[c]);
      long hold = rng.uniform_int(spec.hold_min, spec.hold_max);
      for (long i = 0; i < hold && k < length; ++i, ++k) out(k, c) = level;
    }
  }
  return out;
}

Vec narx_features(const NarxConfig& cfg, const Mat& u, const Mat& y, int k) {
  Vec x(cfg.feature_dim());
  Index at = 0;
  for (int lag = 1; lag <= cfg.input_lags; ++lag) {
    x.segment(at, cfg.input_dim) = u.row(k - lag).transpose();
    at += cfg.input_dim;
  }
  for (int lag = 1; lag <= cfg.output_lags; ++lag) {
    x.segment(at, cfg.output_dim) = y.row(k - lag).transpose();
    at += cfg.output_dim;
  }
  return x;
}

namespace {

void check_narx_args(const Mat& u, const Mat& y, const NarxConfig& cfg) {
  require(cfg.input_dim > 0 && cfg.output_dim > 0, Errc::invalid_argument,
          "narx: channel counts must be positive");
  require(cfg.input_lags >= 1 && cfg.output_lags >= 1, Errc::invalid_argument,
          "narx: lag orders must be >= 1");
  require(u.cols() == cfg.input_dim && y.cols() == cfg.output_dim,
          Errc::dimension_mismatch, "narx: sequence widths do not match config");
  require(u.rows() == y.rows(), Errc::dimension_mismatch,
          "narx: input and output sequences differ in length");
}

} // namespace

NarxDataset build_narx(const Mat& u, const Mat& y, const NarxConfig& cfg) {
  check_narx_args(u, y, cfg);
  const int T = static_cast<int>(u.rows());
  const int w = cfg.window();
  require(T > w, Errc::invalid_argument,
          "build_narx: sequence shorter than the lag window");
  NarxDataset d;
  d.cfg = cfg;
  d.first_target = w;
  d.X.resize(T - w, cfg.feature_dim());
  d.Y.resize(T - w, cfg.output_dim);
  for (int k = w; k < T; ++k) {
    d.X.row(k - w) = narx_features(cfg, u, y, k).transpose();
    d.Y.row(k - w) = y.row(k);
  }
  return d;
}

double evaluate_osap(const ElmModel& m, const NarxDataset& data) {
  require(data.X.rows() > 0, Errc::invalid_argument,
          "evaluate_osap: empty dataset");
  require(data.X.cols() == m.d_in() && data.Y.cols() == m.d_out(),
          Errc::dimension_mismatch, "evaluate_osap: dataset/model mismatch");
  double acc = 0.0;
  for (Index k = 0; k < data.X.rows(); ++k) {
    Vec err = m.normalize_output(m.predict(data.X.row(k).transpose())) -
              m.normalize_output(data.Y.row(k).transpose());
    acc += err.squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(data.X.rows()));
}

Mat rollout_msap(const ElmModel& m, const NarxConfig& cfg, const Mat& u_seq,
                 const Mat& y_hist, int n_pred) {
  require(n_pred >= 1, Errc::invalid_argument, "rollout: n_pred must be >= 1");
  require(cfg.feature_dim() == m.d_in() && cfg.output_dim == m.d_out(),
          Errc::dimension_mismatch, "rollout: config/model mismatch");
  require(u_seq.cols() == cfg.input_dim, Errc::dimension_mismatch,
          "rollout: input width mismatch");
  require(u_seq.rows() >= cfg.input_lags + n_pred - 1, Errc::invalid_argument,
          "rollout: input sequence too short for the horizon");
  require(y_hist.cols() == cfg.output_dim &&
              y_hist.rows() >= cfg.output_lags,
          Errc::invalid_argument, "rollout: initialization window too short");

  // Working sequence: measured history followed by fed-back predictions.
  // Interleaving u and y through narx_features keeps the regressor layout
  // bitwise-identical to the one-step framing.
  Mat y_work(cfg.output_lags + n_pred, cfg.output_dim);
  y_work.topRows(cfg.output_lags) =
      y_hist.bottomRows(cfg.output_lags);
  Mat u_work = u_seq;
  const int off_u = cfg.input_lags;  // virtual time 0 in u_work
  const int off_y = cfg.output_lags; // virtual time 0 in y_work
  for (int t = 0; t < n_pred; ++t) {
    Vec x(cfg.feature_dim());
    Index at = 0;
    for (int lag = 1; lag <= cfg.input_lags; ++lag) {
      x.segment(at, cfg.input_dim) = u_work.row(off_u + t - lag).transpose();
      at += cfg.input_dim;
    }
    for (int lag = 1; lag <= cfg.output_lags; ++lag) {
      x.segment(at, cfg.output_dim) = y_work.row(off_y + t - lag).transpose();
      at += cfg.output_dim;
    }
    y_work.row(off_y + t) = m.predict(x).transpose();
  }
  return y_work.bottomRows(n_pred);
}

double evaluate_msap(const ElmModel& m, const NarxConfig& cfg, const Mat& u,
                     const Mat& y, int horizon) {
  check_narx_args(u, y, cfg);
  const int w = cfg.window();
  const int T = static_cast<int>(u.rows());
  require(horizon >= 1, Errc::invalid_argument, "evaluate_msap: horizon < 1");
  require(T >= w + horizon, Errc::invalid_argument,
          "evaluate_msap: sequence shorter than window + horizon");
  // Consecutive free-running blocks cover [w, T); each block restarts from
  // measured lags.  Every target row is predicted exactly once, so horizon 1
  // reduces to the one-step evaluation bitwise.
  double acc = 0.0;
  for (int s = w; s < T; s += horizon) {
    const int len = std::min(horizon, T - s);
    Mat u_seq = u.middleRows(s - cfg.input_lags, cfg.input_lags + len - 1);
    Mat y_hist = y.topRows(s);
    Mat pred = rollout_msap(m, cfg, u_seq, y_hist, len);
    for (int t = 0; t < len; ++t) {
      Vec err = m.normalize_output(pred.row(t).transpose()) -
                m.normalize_output(y.row(s + t).transpose());
      acc += err.squaredNorm();
    }
  }
  return std::sqrt(acc / static_cast<double>(T - w));
}

ElmModel train_narx(const Mat& u, const Mat& y, const NarxConfig& cfg,
                    int n_hidden, double lambda, std::uint64_t seed) {
  NarxDataset d = build_narx(u, y, cfg);
  Vec in_lo = d.X.colwise().minCoeff().transpose();
  Vec in_hi = d.X.colwise().maxCoeff().transpose();
  Vec out_lo = d.Y.colwise().minCoeff().transpose();
  Vec out_hi = d.Y.colwise().maxCoeff().transpose();
  // A channel that never moves would give a zero-width box; pad it so the
  // normalization stays a bijection.
  auto pad = [](Vec& lo, Vec& hi) {
    for (Index i = 0; i < lo.size(); ++i) {
      double w = hi[i] - lo[i];
      if (w < 1e-12) {
        double p = 0.5 + 0.5 * std::abs(lo[i]);
        lo[i] -= p;
        hi[i] += p;
      }
    }
  };
  pad(in_lo, in_hi);
  pad(out_lo, out_hi);
  ElmModel m(cfg.feature_dim(), cfg.output_dim, n_hidden, seed, in_lo, in_hi,
             out_lo, out_hi);
  m.train(d.X, d.Y, lambda);
  return m;
}

CvResult cross_validate(const Mat& u, const Mat& y,
                        const std::vector<int>& n_hidden_grid,
                        const std::vector<double>& lambda_grid,
                        const std::vector<int>& order_grid,
                        double split_fraction, std::uint64_t seed) {
  require(!n_hidden_grid.empty() && !lambda_grid.empty() &&
              !order_grid.empty(),
          Errc::invalid_argument, "cross_validate: empty grid");
  for (int nh : n_hidden_grid)
    require(nh >= 1, Errc::invalid_argument, "cross_validate: n_hidden < 1");
  for (double l : lambda_grid)
    require(l >= 0.0 && std::isfinite(l), Errc::invalid_argument,
            "cross_validate: bad lambda");
  for (int o : order_grid)
    require(o >= 1, Errc::invalid_argument, "cross_validate: order < 1");
  require(split_fraction > 0.0 && split_fraction < 1.0, Errc::invalid_argument,
          "cross_validate: split must be in (0, 1)");

  const int T = static_cast<int>(u.rows());
  const int split = static_cast<int>(split_fraction * T);
  const int max_order =
      *std::max_element(order_grid.begin(), order_grid.end());
  require(split > max_order && T - split > max_order, Errc::invalid_argument,
          "cross_validate: a split segment is shorter than the lag window");

  Mat u_fit = u.topRows(split), y_fit = y.topRows(split);
  Mat u_val = u.bottomRows(T - split), y_val = y.bottomRows(T - split);

  std::vector<CvCandidate> cands;
  for (int nh : n_hidden_grid)
    for (double l : lambda_grid)
      for (int o : order_grid) cands.push_back({nh, l, o});

  auto score_one = [&](const CvCandidate& c) {
    NarxConfig cfg;
    cfg.input_dim = static_cast<int>(u.cols());
    cfg.output_dim = static_cast<int>(y.cols());
    cfg.input_lags = c.order;
    cfg.output_lags = c.order;
    ElmModel m = train_narx(u_fit, y_fit, cfg, c.n_hidden, c.lambda, seed);
    // Scoring data is framed inside the held-out segment only, so no
    // fitted cycle ever contributes a target here.
    return evaluate_osap(m, build_narx(u_val, y_val, cfg));
  };

  std::vector<std::future<double>> jobs;
  jobs.reserve(cands.size());
  for (const auto& c : cands)
    jobs.push_back(std::async(std::launch::async, score_one, c));

  CvResult r;
  r.split_index = split;
  r.total_length = T;
  r.table.reserve(cands.size());
  for (size_t i = 0; i < cands.size(); ++i)
    r.table.push_back({cands[i], jobs[i].get()});

  auto better = [](const CvScore& a, const CvScore& b) {
    if (a.rmse != b.rmse) return a.rmse < b.rmse;
    if (a.cand.n_hidden != b.cand.n_hidden)
      return a.cand.n_hidden < b.cand.n_hidden;
    if (a.cand.order != b.cand.order) return a.cand.order < b.cand.order;
    return a.cand.lambda > b.cand.lambda;
  };
  r.best = std::min_element(r.table.begin(), r.table.end(), better)->cand;
  return r;
}

} // namespace elmpc
