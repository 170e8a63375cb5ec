// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssplat/rng.hpp"

namespace ssplat {

void OracleNoise::validate() const {
    if (rotation_deg < 0.0 || translation_frac < 0.0 || depth_frac < 0.0)
        throw std::invalid_argument("oracle noise: sigmas must be non-negative");
}

double trajectory_extent(const std::vector<RigidPose>& poses) {
    double best = 0.0;
    for (std::size_t i = 0; i < poses.size(); ++i)
        for (std::size_t j = i + 1; j < poses.size(); ++j)
            best = std::max(best, (poses[i].translation - poses[j].translation).norm());
    return best < 1e-9 ? 1.0 : best;
}

namespace {

RigidPose perturbed_pose(const RigidPose& truth, const OracleNoise& noise, double extent, Rng& rng) {
    if (noise.rotation_deg == 0.0 && noise.translation_frac == 0.0) return truth;
    const double angle = noise.rotation_deg * kPi / 180.0 * rng.normal();
    const Vec3 axis = rng.unit_vector();
    const Mat3 r = truth.rotation * rotation_about_axis(axis, angle);
    const Vec3 t = truth.translation + rng.normal3() * (noise.translation_frac * extent);
    return RigidPose(orthonormalized(r), t);
}

OraclePrediction predict_view(const SyntheticScene& scene, int view, const OracleNoise& noise,
                              double extent, const std::vector<char>* claimed,
                              std::vector<char>* claim_out) {
    if (view < 0 || view >= scene.frame_count())
        throw std::invalid_argument("oracle_predict: view outside the trajectory");

    const RigidPose& truth = scene.poses[view];
    const Intrinsics& k = scene.intrinsics[view];
    const RigidPose inv_pose = invert(truth);
    const Quat inv_q = quat_from_matrix(inv_pose.rotation);

    Rng rng = Rng(noise.seed).fork(static_cast<uint64_t>(view));

    OraclePrediction out;
    out.intrinsics = k;
    out.pose = perturbed_pose(truth, noise, extent, rng);

    for (std::size_t i = 0; i < scene.world.primitives.size(); ++i) {
        const GaussianPrimitive& g = scene.world.primitives[i];
        if (!point_visible(truth, k, g.mean)) continue;
        if (claimed && (*claimed)[i]) continue;
        if (claim_out) (*claim_out)[i] = 1;

        GaussianPrimitive local = g;
        local.mean = inv_pose.apply(g.mean);
        local.orientation = (inv_q * g.orientation).normalized();
        if (noise.depth_frac > 0.0) {
            // Depth error moves the point along its viewing ray.
            double f = 1.0 + noise.depth_frac * rng.normal();
            if (f < 0.05) f = 0.05;
            local.mean = local.mean * f;
        }
        out.locals.push_back(local);
    }
    return out;
}

}  // namespace

OraclePrediction oracle_predict(const SyntheticScene& scene, int view, const OracleNoise& noise) {
    noise.validate();
    return predict_view(scene, view, noise, trajectory_extent(scene.poses), nullptr, nullptr);
}

OraclePredictor::OraclePredictor(const SyntheticScene& scene, const OracleNoise& noise)
    : scene_(scene), noise_(noise), claimed_(scene.world.size(), 0),
      trajectory_extent_(trajectory_extent(scene.poses)) {
    noise_.validate();
}

OraclePrediction OraclePredictor::predict(int view) {
    return predict_view(scene_, view, noise_, trajectory_extent_, &claimed_, &claimed_);
}

}  // namespace ssplat
