// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ssplat/gaussian.hpp"

namespace ssplat {

enum class TrajectoryKind { orbit, random_walk, zigzag };

struct SceneConfig {
    int gaussian_count = 250;
    double extent = 1.6;  // positions uniform in [-extent, extent]^3
    TrajectoryKind trajectory = TrajectoryKind::orbit;
    int frame_count = 32;
    double orbit_radius = 4.0;
    double orbit_height = 0.8;
    int image_width = 48;
    int image_height = 48;
    double focal = 52.0;
    double opacity_min = 0.25, opacity_max = 0.95;
    double scale_min = 0.04, scale_max = 0.14;
    // Resample positions until every Gaussian is visible from some camera.
    bool ensure_gaussian_visibility = true;
};

// Seeded ground-truth world plus camera trajectory; regeneration from
// (config, seed) is bitwise reproducible.
struct SyntheticScene {
    SceneConfig config;
    uint64_t seed = 0;
    WorldScene world;
    std::vector<RigidPose> poses;         // camera-to-world, one per frame
    std::vector<Intrinsics> intrinsics;   // one per frame

    int frame_count() const { return static_cast<int>(poses.size()); }
    std::vector<TrajectoryRecord> trajectory() const;
};

RigidPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = {0.0, 0.0, 1.0});

// Point projects inside the image with depth beyond the near plane.
bool point_visible(const RigidPose& pose, const Intrinsics& k, const Vec3& point,
                   double near_plane = 0.01);

SyntheticScene generate_scene(const SceneConfig& config, uint64_t seed);

}  // namespace ssplat
