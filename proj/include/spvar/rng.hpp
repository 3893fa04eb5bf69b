// Copyright 2026 spvar contributors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

namespace spvar {
namespace detail {

// splitmix64 finalizer; bijective on uint64, so distinct inputs give
// distinct outputs.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for the idx-th substream of a master seed. The pre-mix map
// seed + (idx+1)*odd is bijective in idx, so substreams never collide
// for a fixed master.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t idx) noexcept {
    return mix64(seed + (idx + 1) * 0x9e3779b97f4a7c15ULL);
}

// mt19937_64 with hand-rolled output maps. The engine itself is fully
// specified by the standard; the distribution helpers below avoid the
// implementation-defined std::uniform_* algorithms so that streams are
// reproducible across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    std::uint64_t next() { return eng_(); }

    // uniform double in [0, 1)
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n); n == 0 returns 0
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const int bits = 64 - std::countl_zero(n - 1);
        const std::uint64_t mask = (bits >= 64) ? ~0ULL : ((1ULL << bits) - 1);
        std::uint64_t r;
        do {
            r = eng_() & mask;
        } while (r >= n);
        return r;
    }

    bool coin() { return (eng_() >> 63) != 0; }

    std::int8_t spin() { return coin() ? std::int8_t{1} : std::int8_t{-1}; }

    // standard normal via Box-Muller; second value cached
    double gaussian() {
        if (cached_) {
            const double v = *cached_;
            cached_.reset();
            return v;
        }
        // u1 in (0,1] so the log is finite
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        cached_ = r * std::sin(two_pi * u2);
        return r * std::cos(two_pi * u2);
    }

  private:
    std::mt19937_64 eng_;
    std::optional<double> cached_;
};

}  // namespace detail
}  // namespace spvar
