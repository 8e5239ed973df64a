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

#ifndef ELMPC_CORE_REFERENCE_HPP
#define ELMPC_CORE_REFERENCE_HPP

#include <cstdint>

#include "core/types.hpp"

namespace elmpc {

// Random piecewise-constant reference.  All channels switch together;
// each segment's hold is a uniform integer in [hold_min, hold_max] and
// each channel's level is uniform in [lo_c, hi_c], redrawn (up to 100
// times) while it lies closer than min_delta_c to the previous level so
// consecutive segments are distinguishable.
struct StepReferenceSpec {
  Vec level_lo, level_hi;
  Vec min_delta; // empty means no redraw rule
  int hold_min = 60, hold_max = 60;
  std::uint64_t seed = 0;
};

Mat make_step_reference(const StepReferenceSpec& spec, int length);

// out(k, c) = offset_c + amplitude_c * sin(2 pi k / period_c + phase_c).
struct SinusoidReferenceSpec {
  Vec offset, amplitude, period, phase;
};

Mat make_sinusoid_reference(const SinusoidReferenceSpec& spec, int length);

} // namespace elmpc

#endif
