// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace ssplat {

// Stage lengths of the three-stage training schedule.
inline constexpr long long kStage1Steps = 150000;
inline constexpr long long kStage2Steps = 50000;
inline constexpr long long kStage3Steps = 50000;

// Training-curriculum schedule point: the context-view cap, the annealed
// minimum chunk size and a sampled chunk-size sequence covering max_views.
// The first chunk is always 8; a ragged remainder may close the sequence.
struct CurriculumSample {
    int max_views = 8;
    int min_chunk = 8;
    std::vector<int> chunk_sizes;
};

// Stage 1 ramps the view cap 8 -> 64 between steps 1.5k and 75k with chunks
// fixed at 8; stage 2 anneals the minimum chunk 8 -> 4 over its first 25k
// steps, sampling sizes uniformly from [min, 8]; stage 3 keeps the annealed
// minimum with full cache compression. `step` counts within the stage.
CurriculumSample curriculum(long long step, int stage, uint64_t seed);

}  // namespace ssplat
