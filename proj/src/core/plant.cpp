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

#include "core/plant.hpp"

#include <cmath>

#include "core/error.hpp"

namespace elmpc {

namespace {

// State order: 0 load, 1 phasing, 2 peak pressure, 3 pressure-rise rate,
// 4 torque, 5 air-fuel ratio.  Input order: 0 fuel, 1 recompression
// valve timing, 2 injection timing.  Everything below is expressed on
// normalized [-1, 1] coordinates of the operating box.

constexpr double kStateLo[6] = {2.1, -14.0, 25.0, 0.5, 25.0, 0.9};
constexpr double kStateHi[6] = {3.55, -2.0, 65.0, 6.5, 60.0, 2.4};
constexpr double kInputLo[3] = {19.0, -121.0, 272.0};
constexpr double kInputHi[3] = {25.0, -100.0, 375.0};

// Carry-over fraction per state (first-order lag poles).
constexpr double kAlpha[6] = {0.20, 0.15, 0.15, 0.15, 0.25, 0.20};

// Static-map gains: fuel, valve, injection columns.
constexpr double kGu[6][3] = {
    {0.95, 0.10, -0.12},  // load
    {-0.30, 0.55, 0.50},  // phasing
    {0.55, 0.12, -0.15},  // peak pressure
    {0.30, -0.10, 0.50},  // rise rate
    {0.20, 0.05, -0.05},  // torque
    {-0.60, 0.15, 0.05},  // air-fuel ratio
};

// State feedback gains inside the static map.
constexpr double kGz[6][6] = {
    {0.15, -0.06, 0.0, 0.0, 0.0, 0.05},
    {0.08, 0.18, 0.0, 0.0, 0.0, 0.0},
    {0.30, -0.20, 0.10, 0.0, 0.0, 0.0},
    {0.30, -0.10, 0.05, 0.10, 0.0, 0.0},
    {0.70, -0.08, 0.0, 0.0, 0.10, 0.0},
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.15},
};

constexpr double kOffset[6] = {0.05, -0.05, 0.0, 0.05, 0.0, 0.10};

double lerpn(double v, double lo, double hi) {
  return 2.0 * (v - lo) / (hi - lo) - 1.0;
}

double unlerpn(double v, double lo, double hi) {
  return lo + (hi - lo) * 0.5 * (1.0 + v);
}

} // namespace

Vec BenchmarkPlant::state_lo() {
  return Eigen::Map<const Eigen::Matrix<double, 6, 1>>(kStateLo);
}
Vec BenchmarkPlant::state_hi() {
  return Eigen::Map<const Eigen::Matrix<double, 6, 1>>(kStateHi);
}
Vec BenchmarkPlant::input_lo() {
  return Eigen::Map<const Eigen::Matrix<double, 3, 1>>(kInputLo);
}
Vec BenchmarkPlant::input_hi() {
  return Eigen::Map<const Eigen::Matrix<double, 3, 1>>(kInputHi);
}

Vec BenchmarkPlant::nominal_state() const {
  return 0.5 * (state_lo() + state_hi());
}

Vec BenchmarkPlant::step(const Vec& state, const Vec& input) const {
  require(state.size() == 6 && input.size() == 3, Errc::dimension_mismatch,
          "benchmark plant: state is 6-dimensional, input 3-dimensional");
  double zn[6], un[3];
  for (int i = 0; i < 6; ++i) zn[i] = lerpn(state[i], kStateLo[i], kStateHi[i]);
  for (int i = 0; i < 3; ++i) un[i] = lerpn(input[i], kInputLo[i], kInputHi[i]);
  const double f = un[0], e = un[1], s = un[2];

  double drive[6];
  for (int i = 0; i < 6; ++i) {
    double a = kOffset[i];
    for (int j = 0; j < 3; ++j) a += kGu[i][j] * un[j];
    for (int j = 0; j < 6; ++j) a += kGz[i][j] * zn[j];
    drive[i] = a;
  }
  // Mild bilinear couplings keep the response away from anything a purely
  // linear fit could capture.
  drive[0] += 0.08 * f * e - 0.05 * s * zn[1];
  drive[1] += 0.10 * e * s + 0.06 * f * zn[0];
  drive[2] += 0.05 * f * zn[0];
  drive[3] += 0.08 * f * s;
  drive[5] += -0.05 * f * e;

  Vec next(6);
  for (int i = 0; i < 6; ++i) {
    double v = kAlpha[i] * zn[i] + (1.0 - kAlpha[i]) * std::tanh(drive[i]);
    next[i] = unlerpn(v, kStateLo[i], kStateHi[i]);
  }
  return next;
}

ModelPlant::ModelPlant(const ElmModel& model, int n_inputs)
    : model_(model), inputs_(n_inputs) {
  require(model_.trained(), Errc::untrained_model,
          "model plant needs a trained model");
  states_ = model_.d_out();
  require(n_inputs > 0 && model_.d_in() == n_inputs + states_,
          Errc::dimension_mismatch,
          "model plant needs a lag-one model (d_in = m + n)");
}

Vec ModelPlant::step(const Vec& state, const Vec& input) const {
  require(state.size() == states_ && input.size() == inputs_,
          Errc::dimension_mismatch, "model plant: state/input lengths");
  Vec x(model_.d_in());
  x << input, state;
  return model_.predict(x);
}

Vec ModelPlant::nominal_state() const {
  // The model's output box is derived from its training data, so the box
  // middle is a reasonable resting point.
  return 0.5 * (model_.out_lo() + model_.out_hi());
}

Vec steady_state(const Plant& plant, const Vec& input, const Vec& guess,
                 double damping, int max_iter, double tol) {
  require(damping > 0.0 && damping <= 1.0, Errc::invalid_argument,
          "steady_state: damping must be in (0, 1]");
  Vec z = guess.size() ? guess : plant.nominal_state();
  require(z.size() == plant.n_states(), Errc::dimension_mismatch,
          "steady_state: guess length");
  for (int it = 0; it < max_iter; ++it) {
    Vec next = plant.step(z, input);
    require(next.allFinite(), Errc::divergence,
            "steady_state: iteration left the representable range");
    double gap = (next - z).cwiseAbs().maxCoeff();
    z = (1.0 - damping) * z + damping * next;
    if (gap <= tol) return z;
  }
  fail(Errc::divergence, "steady_state: no fixed point within iteration cap");
}

Vec measure(const Vec& state, const NoiseSpec& noise, Rng& rng) {
  Vec m = state;
  if (!noise.enabled) return m;
  require(noise.variances.size() ==
              static_cast<Index>(noise.channels.size()),
          Errc::dimension_mismatch, "noise: variances/channels mismatch");
  for (size_t i = 0; i < noise.channels.size(); ++i) {
    int c = noise.channels[i];
    require(c >= 0 && c < state.size(), Errc::invalid_argument,
            "noise: channel index out of range");
    require(noise.variances[i] >= 0.0, Errc::invalid_argument,
            "noise: negative variance");
    m[c] += std::sqrt(noise.variances[i]) * rng.gaussian();
  }
  return m;
}

std::pair<Vec, Vec> plant_step(const Plant& plant, const Vec& state,
                               const Vec& input, const NoiseSpec& noise,
                               Rng& rng) {
  Vec next = plant.step(state, input);
  require(next.allFinite(), Errc::divergence,
          "plant_step: state left the representable range");
  Vec meas = measure(next, noise, rng);
  return {next, meas};
}

} // namespace elmpc
