// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cmath>

#include "ssplat/math3.hpp"

namespace ssplat {

// SplitMix64-based generator. std::random distributions are
// implementation-defined, so everything that has to be reproducible
// across toolchains draws from this instead.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed + 0x9E3779B97F4A7C15ULL) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the sine branch is discarded to keep the stream simple.
    double normal() {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    Vec3 normal3() {
        const double a = normal(), b = normal(), c = normal();
        return {a, b, c};
    }

    Vec3 unit_vector() {
        for (;;) {
            const Vec3 v = normal3();
            const double n = v.norm();
            if (n > 1e-12) return v * (1.0 / n);
        }
    }

    // Inclusive bounds.
    int uniform_int(int lo, int hi) {
        const double u = uniform();
        const int span = hi - lo + 1;
        int v = lo + static_cast<int>(u * span);
        return v > hi ? hi : v;
    }

    // Independent deterministic substream; access order of forks does not
    // perturb the parent stream.
    Rng fork(uint64_t stream) const {
        uint64_t z = salt_ ^ (0xD1B54A32D192ED03ULL * (stream + 1));
        return Rng(z);
    }

  private:
    uint64_t state_;
    uint64_t salt_ = state_;
};

}  // namespace ssplat
