// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ssplat/geom.hpp"
#include "ssplat/gaussian.hpp"
#include "ssplat/rng.hpp"

namespace ssplat::testutil {

inline Mat3 random_rotation(Rng& rng) {
    return rotation_about_axis(rng.unit_vector(), rng.uniform(0.0, kPi));
}

inline RigidPose random_pose(Rng& rng, double translation_scale = 1.0) {
    return RigidPose(random_rotation(rng), rng.normal3() * translation_scale);
}

inline GaussianPrimitive random_gaussian(Rng& rng, double extent = 1.0) {
    GaussianPrimitive g;
    g.mean = {rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
    const Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    g.orientation = q.norm() < 1e-9 ? Quat{} : q.normalized();
    for (int i = 0; i < 3; ++i) g.scale[i] = std::exp(rng.uniform(-3.5, -1.5));
    g.opacity = rng.uniform(0.2, 0.95);
    g.color = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    for (int i = 0; i < 9; ++i) g.feature[i] = rng.normal();
    return g;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
    double e = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e = std::max(e, std::fabs(a.m[i][j] - b.m[i][j]));
    return e;
}

inline double pose_diff(const RigidPose& a, const RigidPose& b) {
    return std::max(max_abs_diff(a.rotation, b.rotation), (a.translation - b.translation).norm());
}

}  // namespace ssplat::testutil
