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

// Receding-horizon control of a lag-one nonlinear transition model by
// successive linearization: each cycle the model is linearized at the
// measured state and previously applied input, the horizon is condensed
// into a dense QP over the stacked input moves, and the dual solver
// returns the move sequence whose first element is applied.

#ifndef ELMPC_CORE_MPC_HPP
#define ELMPC_CORE_MPC_HPP

#include <string>
#include <vector>

#include "core/elm.hpp"
#include "core/qp.hpp"
#include "core/types.hpp"

namespace elmpc {

// First-order expansion of the transition model at (state, input):
//   z+ = A z + B u + bias,   y = C z
// with bias = f(state, input) - A state - B input, so the expansion is
// exact at the expansion point.  C selects the tracked states.
struct LinearizedSystem {
  Mat A, B, C;
  Vec bias;     // state equation offset
  Vec out_bias; // output equation offset (zero for a state selector)
};

LinearizedSystem linearize(const ElmModel& m, const Vec& state,
                           const Vec& input, const std::vector<int>& tracked);

// Condensed horizon maps: the stacked predicted outputs over
// horizon_pred steps are
//   Y = from_state z + from_moves dU + from_held u_prev
//     + from_state_bias bias + from_output_bias out_bias
// where dU stacks horizon_ctrl input moves and the input is held constant
// after the last move.
struct PredictionMatrices {
  Mat from_state;       // Ny*p x n
  Mat from_moves;       // Ny*p x Nu*m, lower block band
  Mat from_held;        // Ny*p x m
  Mat from_state_bias;  // Ny*p x n
  Mat from_output_bias; // Ny*p x p (stacked identity)
};

PredictionMatrices build_prediction(const Mat& A, const Mat& B, const Mat& C,
                                    int horizon_pred, int horizon_ctrl);

struct MpcConfig {
  int horizon_pred = 3;
  int horizon_ctrl = 3;
  std::vector<int> tracked{0, 1};
  Vec w_track;         // output weights, stacked Ny*p (or p, expanded)
  Vec w_move;          // move weights, stacked Nu*m (or m, expanded), > 0
  Vec u_lo, u_hi;      // m, hard
  Vec du_lo, du_hi;    // m, hard
  Vec y_lo, y_hi;      // p, relaxed on fallback
  Vec state_lo, state_hi; // n or empty; +-inf entries drop the row
  QpOptions qp;
};

// Repeat a per-stage diagonal across stages; passes a full stack through.
Vec expand_stage_weights(const Vec& w, int stages, int per_stage);

// The cycle QP in the move variables.  Constraint rows are ordered:
// move upper, move lower, input upper, input lower, output upper, output
// lower, then state upper and state lower rows (only rows with a finite
// limit are materialized).
struct CycleQp {
  QpProblem qp;
  Vec free_response; // predicted outputs with all moves zero
  int n_soft_begin;  // first row index of the relaxable tail
};

CycleQp build_qp(const LinearizedSystem& lin, const PredictionMatrices& pred,
                 const Vec& ref_stack, const Vec& state, const Vec& u_prev,
                 const MpcConfig& cfg);

struct StepDiagnostics {
  QpStatus qp_status = QpStatus::converged;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  double hessian_condition = 0.0;
  int fallback = 0; // 0 none, 1 soft rows dropped, 2 zero move
  bool clamped = false;
  std::string active_mask; // '0'/'1' per constraint row of the full QP
  int n_active = 0;
};

class MpcController {
public:
  // Takes a copy of the model; the model must be trained with lag order
  // one (d_in = n_inputs + n_states).
  MpcController(const ElmModel& model, const MpcConfig& cfg,
                const Vec& u_init);

  int n_states() const { return n_; }
  int n_inputs() const { return m_; }
  int n_tracked() const { return p_; }
  int constraint_count() const { return q_; }
  const MpcConfig& config() const { return cfg_; }
  const ElmModel& model() const { return model_; }
  const Vec& last_input() const { return u_prev_; }

  // One cycle; ref_stack has horizon_pred * n_tracked entries.  Applies
  // the hard move and range limits to the returned input and retains it
  // as the next cycle's held input.
  Vec step(const Vec& state, const Vec& ref_stack,
           StepDiagnostics* diag = nullptr);

  void reset(const Vec& u_init);

private:
  ElmModel model_;
  MpcConfig cfg_;
  Vec u_prev_;
  Vec warm_;
  int n_ = 0, m_ = 0, p_ = 0, q_ = 0;
};

} // namespace elmpc

#endif
