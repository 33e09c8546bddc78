// Copyright 2026 the adcp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace adcp {

// mt19937 output is fully specified by the standard; the std distributions are
// not. Samples are derived from raw draws only, so identical seeds give
// identical streams on every platform.
using Rng = std::mt19937;

inline uint32_t rand_u32(Rng& rng) { return rng(); }

/// Uniform double in [0, 1) built from 53 random mantissa bits.
inline double rand_unit(Rng& rng) {
    const uint64_t hi = rng() >> 5;  // 27 bits
    const uint64_t lo = rng() >> 6;  // 26 bits
    return (hi * 67108864.0 + lo) * (1.0 / 9007199254740992.0);
}

inline double rand_uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rand_unit(rng);
}

/// Uniform integer in [lo, hi], inclusive.
inline int rand_int(Rng& rng, int lo, int hi) {
    const uint32_t span = static_cast<uint32_t>(hi - lo) + 1u;
    return lo + static_cast<int>(rng() % span);
}

/// Standard normal via Box-Muller on the portable uniform source.
inline double rand_normal(Rng& rng) {
    double u1 = rand_unit(rng);
    while (u1 <= 0.0) u1 = rand_unit(rng);
    const double u2 = rand_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// He-style fan-in bound for uniform init under leaky-ReLU(0.1) activations.
inline double he_uniform_bound(int64_t fan_in, double negative_slope = 0.1) {
    const double gain = std::sqrt(2.0 / (1.0 + negative_slope * negative_slope));
    return gain * std::sqrt(3.0 / static_cast<double>(fan_in));
}

} // namespace adcp
