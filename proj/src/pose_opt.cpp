// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cmath>

#include "ssplat/metrics.hpp"

namespace ssplat {

double scene_extent(const WorldScene& scene) {
    if (scene.empty()) return 1.0;
    Vec3 lo = scene.primitives[0].mean, hi = lo;
    for (const auto& g : scene.primitives) {
        lo = {std::min(lo.x, g.mean.x), std::min(lo.y, g.mean.y), std::min(lo.z, g.mean.z)};
        hi = {std::max(hi.x, g.mean.x), std::max(hi.y, g.mean.y), std::max(hi.z, g.mean.z)};
    }
    return std::max((hi - lo).norm(), 1e-6);
}

double render_mse(const WorldScene& scene, const FeatureImage& target, const Intrinsics& k,
                  const RigidPose& pose, const RenderConfig& cfg) {
    const FeatureImage img = render_rgb(scene, pose, k, cfg);
    if (img.data().size() != target.data().size())
        throw std::invalid_argument("render_mse: target shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        const double d = img.data()[i] - target.data()[i];
        sum += d * d;
    }
    return sum / static_cast<double>(img.data().size());
}

RigidPose apply_pose_delta(const RigidPose& pose, const std::array<double, 6>& delta,
                           double scene_scale) {
    const Vec3 omega{delta[0], delta[1], delta[2]};
    const double angle = omega.norm();
    const Mat3 rot = angle < 1e-15 ? Mat3::identity() : rotation_about_axis(omega, angle);
    const Vec3 trans = Vec3{delta[3], delta[4], delta[5]} * scene_scale;
    return compose(pose, RigidPose(rot, trans));
}

std::array<double, 6> pose_loss_gradient(const WorldScene& scene, const FeatureImage& target,
                                         const Intrinsics& k, const RigidPose& pose,
                                         const RenderConfig& cfg, double step) {
    const double scale = scene_extent(scene);
    std::array<double, 6> grad{};
    for (int i = 0; i < 6; ++i) {
        std::array<double, 6> d{};
        d[i] = step;
        const double fp = render_mse(scene, target, k, apply_pose_delta(pose, d, scale), cfg);
        d[i] = -step;
        const double fm = render_mse(scene, target, k, apply_pose_delta(pose, d, scale), cfg);
        grad[i] = (fp - fm) / (2.0 * step);
    }
    return grad;
}

PoseOptimizationResult optimize_target_pose(const WorldScene& scene, const FeatureImage& target,
                                            const Intrinsics& k, const RigidPose& init,
                                            int iterations, const RenderConfig& cfg) {
    const double scale = scene_extent(scene);

    RigidPose current = init;
    double f_current = render_mse(scene, target, k, current, cfg);

    PoseOptimizationResult result;
    result.initial_loss = f_current;
    result.pose = current;
    double f_best = f_current;
    result.best_loss_history.reserve(iterations);

    for (int iter = 0; iter < iterations; ++iter) {
        const std::array<double, 6> grad = pose_loss_gradient(scene, target, k, current, cfg);
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        gnorm = std::sqrt(gnorm);
        if (gnorm > 1e-14) {
            std::array<double, 6> dir{};
            for (int i = 0; i < 6; ++i) dir[i] = -grad[i] / gnorm;
            double step_len = 1.0;
            for (int halving = 0; halving < 40; ++halving) {
                std::array<double, 6> d{};
                for (int i = 0; i < 6; ++i) d[i] = dir[i] * step_len;
                const RigidPose cand = apply_pose_delta(current, d, scale);
                const double f_cand = render_mse(scene, target, k, cand, cfg);
                if (f_cand < f_current) {
                    current = cand;
                    f_current = f_cand;
                    break;
                }
                step_len *= 0.5;
            }
        }
        if (f_current < f_best) {
            f_best = f_current;
            result.pose = current;
        }
        result.best_loss_history.push_back(f_best);
    }
    result.final_loss = f_best;
    return result;
}

}  // namespace ssplat
