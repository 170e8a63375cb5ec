// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/curriculum.hpp"

#include <cmath>
#include <stdexcept>

#include "ssplat/rng.hpp"

namespace ssplat {

namespace {

constexpr long long kRampStart = 1500;
constexpr long long kRampEnd = 75000;
constexpr long long kAnnealSteps = 25000;

int view_ramp(long long step) {
    if (step <= kRampStart) return 8;
    if (step >= kRampEnd) return 64;
    const double f = static_cast<double>(step - kRampStart) / static_cast<double>(kRampEnd - kRampStart);
    return static_cast<int>(std::llround(8.0 + f * 56.0));
}

int annealed_min_chunk(long long step) {
    if (step >= kAnnealSteps) return 4;
    const double f = static_cast<double>(step) / static_cast<double>(kAnnealSteps);
    return static_cast<int>(std::llround(8.0 - f * 4.0));
}

}  // namespace

CurriculumSample curriculum(long long step, int stage, uint64_t seed) {
    if (step < 0) throw std::invalid_argument("curriculum: step must be non-negative");
    if (stage < 1 || stage > 3) throw std::invalid_argument("curriculum: unknown stage");

    CurriculumSample s;
    switch (stage) {
        case 1:
            s.max_views = view_ramp(step);
            s.min_chunk = 8;
            break;
        case 2:
            s.max_views = 64;
            s.min_chunk = annealed_min_chunk(step);
            break;
        case 3:
            s.max_views = 64;
            s.min_chunk = 4;
            break;
    }

    Rng rng(seed + static_cast<uint64_t>(step) * 0x9E3779B9ULL + static_cast<uint64_t>(stage));
    s.chunk_sizes.push_back(8);
    int remaining = s.max_views - 8;
    while (remaining > 0) {
        int size = stage == 1 ? 8 : rng.uniform_int(s.min_chunk, 8);
        if (size > remaining) size = remaining;  // ragged final chunk
        s.chunk_sizes.push_back(size);
        remaining -= size;
    }
    return s;
}

}  // namespace ssplat
