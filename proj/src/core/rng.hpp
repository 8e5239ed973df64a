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

#ifndef ELMPC_CORE_RNG_HPP
#define ELMPC_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "core/error.hpp"

namespace elmpc {

// splitmix64 step; used to derive independent child streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random source.  The engine (mt19937_64) and every mapping
// below are fixed by this file, never by the standard library's
// distributions, so identical seeds give identical streams on every
// platform.  Stream id: "elmpc-rng-1".
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    require(lo <= hi, Errc::invalid_argument, "uniform: lo > hi");
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer on [lo, hi], inclusive.
  long uniform_int(long lo, long hi) {
    require(lo <= hi, Errc::invalid_argument, "uniform_int: lo > hi");
    auto span = static_cast<unsigned long>(hi - lo) + 1UL;
    long v = lo + static_cast<long>(uniform01() * static_cast<double>(span));
    return v > hi ? hi : v;
  }

  // Standard normal via Box-Muller, cosine branch only; no state is kept
  // between draws.
  double gaussian() {
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

private:
  std::mt19937_64 engine_;
};

} // namespace elmpc

#endif
