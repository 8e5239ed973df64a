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

#include "core/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/textio.hpp"

namespace elmpc {

namespace {

// Bound check with a small absolute-plus-relative slack so that values
// produced by the clamp itself never count as violations.
bool outside(double v, double lo, double hi) {
  const double tol = 1e-9;
  return v < lo - tol * (1.0 + std::abs(lo)) ||
         v > hi + tol * (1.0 + std::abs(hi));
}

int status_code(QpStatus s) {
  switch (s) {
  case QpStatus::converged:
    return 0;
  case QpStatus::iteration_cap:
    return 1;
  case QpStatus::infeasible:
    return 2;
  }
  return -1;
}

} // namespace

RunResult run_closed_loop(const Plant& plant, MpcController& ctrl,
                          const Mat& ref, const RunOptions& opt) {
  require(plant.n_states() == ctrl.n_states(), Errc::dimension_mismatch,
          "run: plant/controller state dimension mismatch");
  require(plant.n_inputs() == ctrl.n_inputs(), Errc::dimension_mismatch,
          "run: plant/controller input dimension mismatch");
  const int p = ctrl.n_tracked();
  require(ref.cols() == p, Errc::dimension_mismatch,
          "run: reference column count != tracked channels");
  const int cycles = static_cast<int>(ref.rows());
  require(cycles > 0, Errc::invalid_argument, "run: empty reference");
  require(ref.allFinite(), Errc::invalid_argument,
          "run: nonfinite reference");

  int budget = opt.fallback_budget;
  if (budget <= 0) budget = std::max(20, cycles / 10);

  Rng rng(opt.noise.seed);
  Vec z = opt.initial_state;
  if (z.size() == 0)
    z = steady_state(plant, ctrl.last_input(), plant.nominal_state());
  require(z.size() == plant.n_states(), Errc::dimension_mismatch,
          "run: initial state dimension mismatch");

  const MpcConfig& cfg = ctrl.config();
  const int horizon = cfg.horizon_pred;
  const std::vector<int>& tracked = cfg.tracked;

  RunResult out;
  out.trace.rows.reserve(static_cast<size_t>(cycles));
  RunSummary& s = out.summary;
  s.state_min = z;
  s.state_max = z;

  Vec sumsq = Vec::Zero(p);
  long long iter_sum = 0;

  for (int k = 0; k < cycles; ++k) {
    const Vec u_held = ctrl.last_input();
    TraceRow row;
    row.cycle = k;
    row.ref = ref.row(k).transpose();
    row.state = z;
    try {
      row.measured = measure(z, opt.noise, rng);

      Vec rstack(horizon * p);
      for (int j = 0; j < horizon; ++j) {
        const int r = std::min(k + 1 + j, cycles - 1);
        rstack.segment(j * p, p) = ref.row(r).transpose();
      }
      row.input = ctrl.step(row.measured, rstack, &row.diag);
    } catch (const Error& e) {
      s.failed = true;
      s.failure_reason = e.what();
      break;
    }
    out.trace.rows.push_back(row);
    ++s.cycles_run;

    for (int c = 0; c < p; ++c) {
      const double e = z[tracked[c]] - ref(k, c);
      sumsq[c] += e * e;
    }
    for (int i = 0; i < ctrl.n_inputs(); ++i) {
      if (outside(row.input[i], cfg.u_lo[i], cfg.u_hi[i]))
        ++s.input_violations;
      const double du = row.input[i] - u_held[i];
      if (outside(du, cfg.du_lo[i], cfg.du_hi[i])) ++s.move_violations;
    }
    iter_sum += row.diag.qp_iterations;
    s.qp_iterations_max = std::max(s.qp_iterations_max,
                                   row.diag.qp_iterations);
    if (row.diag.clamped) ++s.clamp_count;
    if (row.diag.fallback > 0) {
      ++s.fallback_count;
      if (s.fallback_count > budget) {
        s.failed = true;
        s.failure_reason = "fallback budget exhausted";
        break;
      }
    }

    Vec next;
    try {
      next = plant.step(z, row.input);
    } catch (const Error& e) {
      s.failed = true;
      s.failure_reason = e.what();
      break;
    }
    if (!next.allFinite()) {
      s.failed = true;
      s.failure_reason = "plant state left the representable range";
      break;
    }
    z = next;
    s.state_min = s.state_min.cwiseMin(z);
    s.state_max = s.state_max.cwiseMax(z);
    if (cfg.state_lo.size() > 0) {
      for (Index i = 0; i < z.size(); ++i) {
        if (std::isfinite(cfg.state_lo[i]) && z[i] < cfg.state_lo[i]) {
          ++s.state_bound_violations;
          break;
        }
        if (std::isfinite(cfg.state_hi[i]) && z[i] > cfg.state_hi[i]) {
          ++s.state_bound_violations;
          break;
        }
      }
    }
  }

  if (s.cycles_run > 0) {
    s.tracking_rmse = (sumsq / s.cycles_run).cwiseSqrt();
    s.qp_iterations_mean =
        static_cast<double>(iter_sum) / s.cycles_run;
    Mat tracked_mat(s.cycles_run, p);
    for (int k = 0; k < s.cycles_run; ++k)
      for (int c = 0; c < p; ++c)
        tracked_mat(k, c) = out.trace.rows[k].state[tracked[c]];
    s.settle_cycles = settle_times(ref.topRows(s.cycles_run), tracked_mat);
  } else {
    s.tracking_rmse = Vec::Zero(p);
  }
  return out;
}

std::vector<int> settle_times(const Mat& ref, const Mat& tracked_states,
                              double band_fraction) {
  require(ref.rows() == tracked_states.rows() && ref.cols() >= 1,
          Errc::dimension_mismatch, "settle: shape mismatch");
  std::vector<int> out;
  const int n = static_cast<int>(ref.rows());
  int seg = 1;
  while (seg < n) {
    if (ref(seg, 0) == ref(seg - 1, 0)) {
      ++seg;
      continue;
    }
    const double target = ref(seg, 0);
    const double band = band_fraction * std::abs(target - ref(seg - 1, 0));
    int end = seg + 1;
    while (end < n && ref(end, 0) == target) ++end;
    int hit = -1;
    for (int k = seg; k < end; ++k) {
      if (std::abs(tracked_states(k, 0) - target) <= band) {
        hit = k - seg;
        break;
      }
    }
    out.push_back(hit);
    seg = end;
  }
  return out;
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path,
                     const std::vector<std::string>& comments) {
  std::ofstream os(path);
  require(os.good(), Errc::io_error, "cannot open " + path);
  for (const auto& c : comments) os << "# " << c << "\n";
  require(!trace.rows.empty(), Errc::invalid_argument, "empty trace");
  const auto& first = trace.rows.front();
  os << "cycle";
  for (Index i = 0; i < first.ref.size(); ++i) os << ",r_" << (i + 1);
  for (Index i = 0; i < first.state.size(); ++i) os << ",z_" << (i + 1);
  for (Index i = 0; i < first.measured.size(); ++i) os << ",zm_" << (i + 1);
  for (Index i = 0; i < first.input.size(); ++i) os << ",u_" << (i + 1);
  os << ",qp_status,qp_iters,qp_kkt,hess_cond,active_mask,fallback,clamped\n";
  for (const auto& row : trace.rows) {
    os << row.cycle;
    for (Index i = 0; i < row.ref.size(); ++i)
      os << "," << format_double(row.ref[i]);
    for (Index i = 0; i < row.state.size(); ++i)
      os << "," << format_double(row.state[i]);
    for (Index i = 0; i < row.measured.size(); ++i)
      os << "," << format_double(row.measured[i]);
    for (Index i = 0; i < row.input.size(); ++i)
      os << "," << format_double(row.input[i]);
    os << "," << status_code(row.diag.qp_status) << ","
       << row.diag.qp_iterations << ","
       << format_double(row.diag.kkt_residual) << ","
       << format_double(row.diag.hessian_condition) << ","
       << row.diag.active_mask << "," << row.diag.fallback << ","
       << (row.diag.clamped ? 1 : 0) << "\n";
  }
  require(os.good(), Errc::io_error, "write failed for " + path);
}

void write_summary(const RunSummary& s, const std::string& path,
                   const std::vector<std::string>& comments) {
  std::ofstream os(path);
  require(os.good(), Errc::io_error, "cannot open " + path);
  for (const auto& c : comments) os << "# " << c << "\n";
  os << "failed = " << (s.failed ? 1 : 0) << "\n";
  if (s.failed) os << "failure_reason = " << s.failure_reason << "\n";
  os << "cycles_run = " << s.cycles_run << "\n";
  for (Index i = 0; i < s.tracking_rmse.size(); ++i)
    os << "tracking_rmse_" << (i + 1) << " = "
       << format_double(s.tracking_rmse[i]) << "\n";
  os << "settle_count = " << s.settle_cycles.size() << "\n";
  for (size_t i = 0; i < s.settle_cycles.size(); ++i)
    os << "settle_" << (i + 1) << " = " << s.settle_cycles[i] << "\n";
  os << "input_violations = " << s.input_violations << "\n";
  os << "move_violations = " << s.move_violations << "\n";
  os << "state_bound_violations = " << s.state_bound_violations << "\n";
  os << "fallback_count = " << s.fallback_count << "\n";
  os << "clamp_count = " << s.clamp_count << "\n";
  os << "qp_iterations_mean = " << format_double(s.qp_iterations_mean)
     << "\n";
  os << "qp_iterations_max = " << s.qp_iterations_max << "\n";
  for (Index i = 0; i < s.state_min.size(); ++i)
    os << "state_min_" << (i + 1) << " = " << format_double(s.state_min[i])
       << "\n";
  for (Index i = 0; i < s.state_max.size(); ++i)
    os << "state_max_" << (i + 1) << " = " << format_double(s.state_max[i])
       << "\n";
  require(os.good(), Errc::io_error, "write failed for " + path);
}

} // namespace elmpc
