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

#ifndef ELMPC_CORE_PLANT_HPP
#define ELMPC_CORE_PLANT_HPP

#include <memory>
#include <utility>
#include <vector>

#include "core/elm.hpp"
#include "core/rng.hpp"
#include "core/types.hpp"

namespace elmpc {

// Discrete-time simulation target: z(k+1) = step(z(k), u(k)).
class Plant {
public:
  virtual ~Plant() = default;
  virtual int n_states() const = 0;
  virtual int n_inputs() const = 0;
  virtual Vec step(const Vec& state, const Vec& input) const = 0;
  // Middle of the plant's nominal operating box; used as the default
  // initial guess for steady-state searches.
  virtual Vec nominal_state() const = 0;
  virtual std::unique_ptr<Plant> clone() const = 0;
};

// Six-state, three-input cycle-to-cycle combustion surrogate.  Each state
// is a first-order lag toward a saturating (tanh) static map of the
// normalized inputs and states with mild bilinear couplings, so
// trajectories are smooth, bounded, and reachable with a lag-one model.
// All coefficients are fixed constants of this file; see README for the
// map and the operating ranges.
class BenchmarkPlant : public Plant {
public:
  int n_states() const override { return 6; }
  int n_inputs() const override { return 3; }
  Vec step(const Vec& state, const Vec& input) const override;
  Vec nominal_state() const override;
  std::unique_ptr<Plant> clone() const override {
    return std::make_unique<BenchmarkPlant>(*this);
  }

  static Vec state_lo();
  static Vec state_hi();
  static Vec input_lo();
  static Vec input_hi();
};

// Uses a trained lag-one model as the plant itself: the transition is the
// model's own one-step prediction.
class ModelPlant : public Plant {
public:
  ModelPlant(const ElmModel& model, int n_inputs);
  int n_states() const override { return states_; }
  int n_inputs() const override { return inputs_; }
  Vec step(const Vec& state, const Vec& input) const override;
  Vec nominal_state() const override;
  std::unique_ptr<Plant> clone() const override {
    return std::make_unique<ModelPlant>(*this);
  }
  const ElmModel& model() const { return model_; }

private:
  ElmModel model_;
  int states_ = 0, inputs_ = 0;
};

// Damped fixed-point search for step(z, u) = z under a constant input.
Vec steady_state(const Plant& plant, const Vec& input, const Vec& guess,
                 double damping = 0.5, int max_iter = 20000,
                 double tol = 1e-12);

// Additive Gaussian measurement noise on selected state channels.
struct NoiseSpec {
  bool enabled = false;
  std::vector<int> channels{0, 1};
  Vec variances; // aligned with channels
  std::uint64_t seed = 0;
};

// One plant cycle: returns the true next state and the (optionally noisy)
// measurement of it.  Noise only touches the measurement, never the state.
std::pair<Vec, Vec> plant_step(const Plant& plant, const Vec& state,
                               const Vec& input, const NoiseSpec& noise,
                               Rng& rng);

Vec measure(const Vec& state, const NoiseSpec& noise, Rng& rng);

} // namespace elmpc

#endif
