// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ssplat/geom.hpp"

namespace ssplat {

// One splat. Covariance is kept factored as unit quaternion + per-axis sigma
// so rigid transformation is exact and the invariants stay cheap to check.
struct GaussianPrimitive {
    Vec3 mean{};
    Quat orientation{};
    Vec3 scale{0.01, 0.01, 0.01};
    double opacity = 1.0;
    Vec3 color{};
    std::array<double, 9> feature{};

    void validate() const;
};

// Accumulated world-space scene. Append-only during a streaming run except
// for opacity pruning.
struct WorldScene {
    std::vector<GaussianPrimitive> primitives;
    std::vector<int32_t> chunk_stamp;

    std::size_t size() const { return primitives.size(); }
    bool empty() const { return primitives.empty(); }
    void append(const GaussianPrimitive& g, int32_t chunk) {
        primitives.push_back(g);
        chunk_stamp.push_back(chunk);
    }
};

enum class PoseSource { ground_truth, predicted };

// predicted_scale_consistent returns Scale(pred)/Scale(gt), which keeps
// assembly invariant to a uniform rescale of the GT trajectory;
// paper_literal is the reciprocal convention, kept selectable for comparison.
enum class AlignmentMode { predicted_scale_consistent, paper_literal };

struct AssemblyConfig {
    PoseSource pose_source = PoseSource::ground_truth;
    AlignmentMode alignment_mode = AlignmentMode::predicted_scale_consistent;
    double prune_threshold = 0.005;
    // Measure Scale() on camera centers (-R^T t) instead of pose translations.
    bool scale_from_camera_centers = false;

    void validate() const;
};

// Maps a camera-space Gaussian into world space: mean through the pose,
// orientation left-multiplied by the pose rotation, payload untouched.
GaussianPrimitive transform_local(const GaussianPrimitive& g, const RigidPose& a);

// Scale() = max pairwise translation distance within a pose set. Computed
// once from the first chunk and frozen for the run. Degenerate scales
// (< 1e-9) fall back to factor 1.
double scale_factor(const std::vector<RigidPose>& gt_first_chunk,
                    const std::vector<RigidPose>& pred_first_chunk, AlignmentMode mode,
                    bool use_camera_centers = false);

// Appends each view's local Gaussians transformed by its pose, with the pose
// translation scaled by `factor` (rotation untouched).
void assemble(WorldScene& scene, const std::vector<std::vector<GaussianPrimitive>>& locals,
              const std::vector<RigidPose>& poses, double factor, int32_t chunk);

// Keeps exactly the primitives with opacity >= threshold, order preserved.
WorldScene prune(const WorldScene& scene, double threshold);

// Text scene file: "<count> <version>" header, then 23 fields per line
// (mean x3, quaternion wxyz, scale x3, opacity, color x3, feature x9),
// round-trip lossless at 17 significant digits.
std::string scene_to_text(const WorldScene& scene);
WorldScene scene_from_text(const std::string& text);
void save_scene(const std::string& path, const WorldScene& scene);
WorldScene load_scene(const std::string& path);

}  // namespace ssplat
