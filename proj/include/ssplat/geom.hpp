// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssplat/math3.hpp"

namespace ssplat {

// Rigid camera-to-world transform. The rotation is checked to be a proper
// rotation on construction (||R^T R - I||_inf <= 1e-6, det > 0).
struct RigidPose {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{};

    RigidPose() = default;
    RigidPose(const Mat3& r, const Vec3& t);

    static RigidPose identity() { return RigidPose{}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

// a then b, i.e. (a o b)(x) = a(b(x)). Rotation drift past 1e-8 is repaired
// by polar decomposition so long composition chains keep the invariant.
RigidPose compose(const RigidPose& a, const RigidPose& b);
RigidPose invert(const RigidPose& p);
// i^-1 o j.
RigidPose relative(const RigidPose& i, const RigidPose& j);

// Geodesic angle of a rotation, in [0, pi]. The arccos argument is clamped.
double rotation_angle(const Mat3& r);

// Angle between the directions of a and b in [0, pi]; returns 0 when either
// norm is below 1e-9 so degenerate pairs do not penalize.
double translation_direction_angle(const Vec3& a, const Vec3& b);

// Greedy max-min selection seeded at index 0, ties broken by lowest index,
// result re-sorted into original sequence order.
std::vector<int> farthest_point_sample(const std::vector<Vec3>& positions, int count);

struct Intrinsics {
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    int width = 1, height = 1;

    Intrinsics() = default;
    Intrinsics(double fx, double fy, double cx, double cy, int width, int height);
};

struct TrajectoryRecord {
    int frame = 0;
    RigidPose pose;
    std::optional<Intrinsics> intrinsics;
};

// One JSON object per line: frame index, row-major rotation, translation,
// optional intrinsics.
std::string trajectory_to_text(const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> trajectory_from_text(const std::string& text);
void save_trajectory(const std::string& path, const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> load_trajectory(const std::string& path);

}  // namespace ssplat
