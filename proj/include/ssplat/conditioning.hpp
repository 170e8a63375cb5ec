// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssplat/render.hpp"

namespace ssplat {

// Token grid produced by patchify: one d_cond vector per ceil(H/8) x ceil(W/8)
// cell, row-major, token-major storage.
struct ConditioningTokens {
    int grid_h = 0, grid_w = 0, dim = 0;
    int view_index = 0;
    std::vector<double> data;

    double* token(int iy, int ix) { return data.data() + (static_cast<std::size_t>(iy) * grid_w + ix) * dim; }
    const double* token(int iy, int ix) const {
        return data.data() + (static_cast<std::size_t>(iy) * grid_w + ix) * dim;
    }
};

// Three stride-2 convolutions (kernel 3, padding 1 with edge replication),
// channel widths 15 -> 32 -> 64 -> d_cond, ReLU between stages. Weights are
// fan-in-normalized uniform, reproducible from (seed, d_cond).
struct PatchifyWeights {
    struct Stage {
        int in_ch = 0, out_ch = 0;
        std::vector<double> w;  // [out][in][3][3]
        std::vector<double> b;  // [out]
    };
    int d_cond = 64;
    Stage stages[3];

    static PatchifyWeights seeded(uint64_t seed, int d_cond = 64);
};

ConditioningTokens patchify(const FeatureImage& img, const PatchifyWeights& weights);

// Renders the accumulated scene at the assembly pose (with k_gt when
// provided, else the predicted intrinsics), concatenates observation and
// rendering to 15 channels and patchifies. Well-defined for an empty scene.
ConditioningTokens build_conditioning(const WorldScene& scene, const FeatureImage& observation,
                                      const RigidPose& assembly_pose,
                                      const std::optional<Intrinsics>& k_gt, const Intrinsics& k_pred,
                                      const PatchifyWeights& weights, const RenderConfig& cfg = {});

}  // namespace ssplat
