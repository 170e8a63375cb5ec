// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <variant>
#include <vector>

#include "ssplat/metrics.hpp"
#include "ssplat/model.hpp"
#include "ssplat/oracle.hpp"
#include "ssplat/synthetic.hpp"

namespace ssplat {

// Oracle predictor with controlled noise, or the seeded toy network.
using PredictorKind = std::variant<OracleNoise, ModelProfile>;

struct StreamOptions {
    int chunk_size = 8;
    bool compress = true;
    bool use_gt_intrinsics = true;
    uint64_t seed = 0;
    RenderConfig render;
};

struct ChunkLog {
    int chunk_index = 0;
    int first_frame = 0;
    int frame_count = 0;
    double millis = 0.0;
    int cached_token_sets = 0;    // measured from the live cache (bookkept for the oracle)
    int expected_token_sets = 0;  // accounting formula at this point of the stream
    std::size_t cache_bytes = 0;
    std::size_t scene_size = 0;   // after pruning
};

struct StreamMemoryReport {
    int token_sets = 0;        // cached (view, layer) token sets at the end of the run
    long long baseline = 0;    // uncompressed equivalent for the same stream
    double reduction_pct = 0.0;
    std::size_t cache_bytes = 0;  // live cache size (toy predictor only)
};

struct StreamResult {
    WorldScene scene;
    std::vector<ChunkLog> chunks;
    StreamMemoryReport memory;
    std::vector<RigidPose> predicted_poses;   // one per frame
    std::vector<FocalPair> predicted_focals;  // one per frame
    double scale_factor = 1.0;                // frozen from the first chunk
};

// Streams the trajectory in chunks (first chunk 8, later chunks of
// options.chunk_size, ragged final), predicts local Gaussians per view,
// assembles them at scale-aligned ground-truth or predicted poses and prunes
// after every chunk.
StreamResult stream_reconstruct(const SyntheticScene& input, const PredictorKind& predictor,
                                const AssemblyConfig& assembly, const StreamOptions& options);

}  // namespace ssplat
