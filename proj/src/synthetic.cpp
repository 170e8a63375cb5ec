// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "ssplat/rng.hpp"

namespace ssplat {

std::vector<TrajectoryRecord> SyntheticScene::trajectory() const {
    std::vector<TrajectoryRecord> records(poses.size());
    for (std::size_t i = 0; i < poses.size(); ++i)
        records[i] = {static_cast<int>(i), poses[i], intrinsics[i]};
    return records;
}

RigidPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = up.cross(forward);
    if (right.norm() < 1e-9) right = Vec3{1, 0, 0}.cross(forward);
    right = right.normalized();
    const Vec3 down = forward.cross(right);
    return RigidPose(Mat3::from_columns(right, down, forward), eye);
}

bool point_visible(const RigidPose& pose, const Intrinsics& k, const Vec3& point, double near_plane) {
    const Vec3 p = pose.rotation.transposed() * (point - pose.translation);
    if (!(p.z > near_plane)) return false;
    const double u = k.fx * p.x / p.z + k.cx;
    const double v = k.fy * p.y / p.z + k.cy;
    return u >= 0.0 && u < k.width && v >= 0.0 && v < k.height;
}

namespace {

std::vector<RigidPose> make_trajectory(const SceneConfig& cfg, Rng& rng) {
    std::vector<RigidPose> poses;
    poses.reserve(cfg.frame_count);
    const Vec3 center{0, 0, 0};
    switch (cfg.trajectory) {
        case TrajectoryKind::orbit:
            for (int i = 0; i < cfg.frame_count; ++i) {
                const double theta = 2.0 * kPi * i / cfg.frame_count;
                const Vec3 eye{cfg.orbit_radius * std::cos(theta), cfg.orbit_radius * std::sin(theta),
                               cfg.orbit_height};
                poses.push_back(look_at(eye, center));
            }
            break;
        case TrajectoryKind::random_walk: {
            Vec3 eye{cfg.orbit_radius, 0.0, cfg.orbit_height};
            const double step = 0.12 * cfg.orbit_radius;
            for (int i = 0; i < cfg.frame_count; ++i) {
                poses.push_back(look_at(eye, center));
                Vec3 next = eye + rng.normal3() * step;
                // Keep the walk from wandering into the Gaussian cloud.
                if (next.norm() < 0.5 * cfg.orbit_radius) next = next.normalized() * (0.5 * cfg.orbit_radius);
                eye = next;
            }
            break;
        }
        case TrajectoryKind::zigzag:
            for (int i = 0; i < cfg.frame_count; ++i) {
                const double f = cfg.frame_count > 1 ? static_cast<double>(i) / (cfg.frame_count - 1) : 0.0;
                const double x = -cfg.orbit_radius + 2.0 * cfg.orbit_radius * f;
                const double tri = std::fabs(std::fmod(4.0 * f, 2.0) - 1.0);  // triangle wave
                const double y = cfg.orbit_radius * (0.4 + 0.5 * tri);
                poses.push_back(look_at({x, y, cfg.orbit_height}, center));
            }
            break;
    }
    return poses;
}

}  // namespace

SyntheticScene generate_scene(const SceneConfig& config, uint64_t seed) {
    if (config.gaussian_count < 1) throw std::invalid_argument("generate_scene: count must be >= 1");
    if (config.frame_count < 1) throw std::invalid_argument("generate_scene: frame count must be >= 1");

    SyntheticScene scene;
    scene.config = config;
    scene.seed = seed;

    const Intrinsics k(config.focal, config.focal, config.image_width / 2.0, config.image_height / 2.0,
                       config.image_width, config.image_height);
    scene.intrinsics.assign(config.frame_count, k);

    for (int attempt = 0; attempt < 1000; ++attempt) {
        Rng rng = Rng(seed).fork(attempt);
        scene.poses = make_trajectory(config, rng);
        scene.world = WorldScene{};

        bool ok = true;
        for (int i = 0; i < config.gaussian_count && ok; ++i) {
            GaussianPrimitive g;
            bool placed = false;
            for (int tries = 0; tries < 1000; ++tries) {
                g.mean = {rng.uniform(-config.extent, config.extent),
                          rng.uniform(-config.extent, config.extent),
                          rng.uniform(-config.extent, config.extent)};
                if (!config.ensure_gaussian_visibility) {
                    placed = true;
                    break;
                }
                for (const auto& pose : scene.poses)
                    if (point_visible(pose, k, g.mean)) {
                        placed = true;
                        break;
                    }
                if (placed) break;
            }
            if (!placed) {
                ok = false;
                break;
            }
            const Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            g.orientation = q.norm() < 1e-9 ? Quat{} : q.normalized();
            const double log_lo = std::log(config.scale_min), log_hi = std::log(config.scale_max);
            for (int s = 0; s < 3; ++s) g.scale[s] = std::exp(rng.uniform(log_lo, log_hi));
            g.opacity = rng.uniform(config.opacity_min, config.opacity_max);
            g.color = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
            for (int f = 0; f < 9; ++f) g.feature[f] = 0.5 * rng.normal();
            g.validate();
            scene.world.append(g, 0);
        }
        if (!ok) continue;

        // Every camera must see at least one Gaussian.
        bool all_cameras_ok = true;
        for (const auto& pose : scene.poses) {
            bool sees_any = false;
            for (const auto& g : scene.world.primitives)
                if (point_visible(pose, k, g.mean)) {
                    sees_any = true;
                    break;
                }
            if (!sees_any) {
                all_cameras_ok = false;
                break;
            }
        }
        if (all_cameras_ok) return scene;
    }
    throw std::runtime_error("generate_scene: visibility constraints unsatisfiable after 1000 attempts");
}

}  // namespace ssplat
