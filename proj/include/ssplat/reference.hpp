// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ssplat/model.hpp"
#include "ssplat/render.hpp"

namespace ssplat {

// Serial reference renderer: exhaustive per-pixel pass over all depth-sorted
// splats, no tiling, no threads. Kept for testing the parallel kernel
// (outputs must match bitwise) and as the benchmark baseline.
FeatureImage reference_render(const WorldScene& scene, const RigidPose& camera, const Intrinsics& k,
                              const RenderConfig& cfg = {});

// Serial reference decoder that keeps every view's tokens at every global
// layer (no truncation, no selective retention, no register marking). The
// compressed decoder under the retain_all policy must reproduce it bitwise.
class ReferenceDecoder {
  public:
    explicit ReferenceDecoder(const StreamModel& model);

    std::vector<Matrix> decode_chunk(const EncodedChunk& chunk);

  private:
    const StreamModel& model_;
    std::vector<std::vector<Matrix>> history_;  // [pair][past chunk] token rows
};

}  // namespace ssplat
