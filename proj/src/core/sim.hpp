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

// Closed-loop driver: measure, control, apply, repeat, with a per-cycle
// trace and an aggregate summary.

#ifndef ELMPC_CORE_SIM_HPP
#define ELMPC_CORE_SIM_HPP

#include <string>
#include <vector>

#include "core/mpc.hpp"
#include "core/plant.hpp"
#include "core/types.hpp"

namespace elmpc {

struct TraceRow {
  int cycle = 0;
  Vec ref;      // reference for this cycle
  Vec state;    // true state at cycle start
  Vec measured; // what the controller saw
  Vec input;    // applied during this cycle
  StepDiagnostics diag;
};

struct SimulationTrace {
  std::vector<TraceRow> rows;
};

struct RunOptions {
  NoiseSpec noise;
  Vec initial_state;  // empty: steady state under the initial held input
  int fallback_budget = -1; // <= 0 selects max(20, cycles / 10)
};

struct RunSummary {
  bool failed = false;
  std::string failure_reason;
  int cycles_run = 0;
  Vec tracking_rmse;          // per tracked channel, engineering units
  std::vector<int> settle_cycles; // per reference step on channel 0; -1:
                                  // never entered the band
  int input_violations = 0;   // applied input outside range
  int move_violations = 0;    // applied move outside range
  int state_bound_violations = 0;
  int fallback_count = 0;
  int clamp_count = 0;
  double qp_iterations_mean = 0.0;
  int qp_iterations_max = 0;
  Vec state_max, state_min;   // per-state extrema over the run
};

struct RunResult {
  SimulationTrace trace;
  RunSummary summary;
};

// Runs `ref.rows()` cycles.  The reference preview passed to the
// controller at cycle k stacks rows k+1 .. k+horizon (clamped at the end
// of the sequence).  Every random draw comes from `noise.seed`, so a rerun
// with equal arguments reproduces the trace bitwise.
RunResult run_closed_loop(const Plant& plant, MpcController& ctrl,
                          const Mat& ref, const RunOptions& opt);

void write_trace_csv(const SimulationTrace& trace, const std::string& path,
                     const std::vector<std::string>& comments);

void write_summary(const RunSummary& s, const std::string& path,
                   const std::vector<std::string>& comments);

// 5%-of-step settling analysis on tracked channel 0: for each level change
// the entry cycle into the band around the new level, or -1.
std::vector<int> settle_times(const Mat& ref, const Mat& tracked_states,
                              double band_fraction = 0.05);

} // namespace elmpc

#endif
