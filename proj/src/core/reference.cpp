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

#include "core/reference.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace elmpc {

Mat make_step_reference(const StepReferenceSpec& spec, int length) {
  const Index channels = spec.level_lo.size();
  require(channels > 0 && spec.level_hi.size() == channels,
          Errc::dimension_mismatch, "step reference: level bounds mismatch");
  require(spec.min_delta.size() == 0 || spec.min_delta.size() == channels,
          Errc::dimension_mismatch, "step reference: min_delta length");
  require(length > 0, Errc::invalid_argument, "step reference: length");
  require(spec.hold_min >= 1 && spec.hold_max >= spec.hold_min,
          Errc::invalid_argument, "step reference: hold range");
  for (Index c = 0; c < channels; ++c)
    require(spec.level_lo[c] <= spec.level_hi[c], Errc::invalid_argument,
            "step reference: level_lo > level_hi");

  Rng rng(spec.seed);
  Mat out(length, channels);
  Vec level(channels);
  bool first = true;
  int k = 0;
  while (k < length) {
    for (Index c = 0; c < channels; ++c) {
      double v = rng.uniform(spec.level_lo[c], spec.level_hi[c]);
      if (!first && spec.min_delta.size() > 0) {
        for (int tries = 0;
             tries < 100 && std::abs(v - level[c]) < spec.min_delta[c];
             ++tries)
          v = rng.uniform(spec.level_lo[c], spec.level_hi[c]);
      }
      level[c] = v;
    }
    first = false;
    long hold = rng.uniform_int(spec.hold_min, spec.hold_max);
    for (long i = 0; i < hold && k < length; ++i, ++k)
      out.row(k) = level.transpose();
  }
  return out;
}

Mat make_sinusoid_reference(const SinusoidReferenceSpec& spec, int length) {
  const Index channels = spec.offset.size();
  require(channels > 0 && spec.amplitude.size() == channels &&
              spec.period.size() == channels && spec.phase.size() == channels,
          Errc::dimension_mismatch, "sinusoid reference: parameter lengths");
  require(length > 0, Errc::invalid_argument, "sinusoid reference: length");
  for (Index c = 0; c < channels; ++c)
    require(spec.period[c] > 0.0, Errc::invalid_argument,
            "sinusoid reference: period must be > 0");
  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
  Mat out(length, channels);
  for (int k = 0; k < length; ++k)
    for (Index c = 0; c < channels; ++c)
      out(k, c) = spec.offset[c] +
                  spec.amplitude[c] *
                      std::sin(kTwoPi * k / spec.period[c] + spec.phase[c]);
  return out;
}

} // namespace elmpc
