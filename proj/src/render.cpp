// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/render.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace ssplat {

void RenderConfig::validate() const {
    if (!(sigma_cutoff > 0.0)) throw std::invalid_argument("render: sigma_cutoff must be positive");
    if (!(alpha_epsilon > 0.0 && alpha_epsilon < 1.0))
        throw std::invalid_argument("render: alpha_epsilon out of (0, 1)");
}

std::optional<ScreenSplat> project(const GaussianPrimitive& g, const RigidPose& camera,
                                   const Intrinsics& k, const RenderConfig& cfg) {
    const Mat3 r_wc = camera.rotation.transposed();
    const Vec3 p = r_wc * (g.mean - camera.translation);
    if (!(p.z > cfg.near_plane)) return std::nullopt;

    const double inv_z = 1.0 / p.z;
    ScreenSplat s;
    s.x = k.fx * p.x * inv_z + k.cx;
    s.y = k.fy * p.y * inv_z + k.cy;
    s.depth = p.z;

    const Mat3 rot = matrix_from_quat(g.orientation);
    const Mat3 cov_world =
        rot * Mat3::diagonal(g.scale.x * g.scale.x, g.scale.y * g.scale.y, g.scale.z * g.scale.z) *
        rot.transposed();
    const Mat3 cov_cam = r_wc * cov_world * camera.rotation;

    // Perspective Jacobian rows at the view-space mean.
    const double j00 = k.fx * inv_z, j02 = -k.fx * p.x * inv_z * inv_z;
    const double j11 = k.fy * inv_z, j12 = -k.fy * p.y * inv_z * inv_z;

    // Row vectors of J * cov_cam.
    const double a0 = j00 * cov_cam.m[0][0] + j02 * cov_cam.m[2][0];
    const double a1 = j00 * cov_cam.m[0][1] + j02 * cov_cam.m[2][1];
    const double a2 = j00 * cov_cam.m[0][2] + j02 * cov_cam.m[2][2];
    const double b1 = j11 * cov_cam.m[1][1] + j12 * cov_cam.m[2][1];
    const double b2 = j11 * cov_cam.m[1][2] + j12 * cov_cam.m[2][2];

    s.cov_xx = a0 * j00 + a2 * j02 + 0.3;
    s.cov_xy = a1 * j11 + a2 * j12;
    s.cov_yy = b1 * j11 + b2 * j12 + 0.3;
    return s;
}

namespace render_detail {

std::vector<FlatSplat> prepare_splats(const WorldScene& scene, const RigidPose& camera,
                                      const Intrinsics& k, const RenderConfig& cfg) {
    const int n = static_cast<int>(scene.primitives.size());
    std::vector<char> visible(n, 0);
    std::vector<ScreenSplat> projected(n);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const auto s = project(scene.primitives[i], camera, k, cfg);
        if (s) {
            projected[i] = *s;
            visible[i] = 1;
        }
    }

    std::vector<int> order;
    order.reserve(n);
    for (int i = 0; i < n; ++i)
        if (visible[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (projected[a].depth != projected[b].depth) return projected[a].depth < projected[b].depth;
        return a < b;  // determinism rule for depth ties
    });

    std::vector<FlatSplat> flats;
    flats.reserve(order.size());
    for (int idx : order) {
        const ScreenSplat& s = projected[idx];
        const double det = s.cov_xx * s.cov_yy - s.cov_xy * s.cov_xy;
        if (!(det > 0.0)) continue;
        FlatSplat f;
        f.mx = s.x;
        f.my = s.y;
        f.conic_a = s.cov_yy / det;
        f.conic_b = -s.cov_xy / det;
        f.conic_c = s.cov_xx / det;
        const GaussianPrimitive& g = scene.primitives[idx];
        f.opacity = g.opacity;
        f.payload[0] = g.color.x;
        f.payload[1] = g.color.y;
        f.payload[2] = g.color.z;
        for (int c = 0; c < 9; ++c) f.payload[3 + c] = g.feature[c];
        // Conservative bbox: the Mahalanobis ellipse extent along an axis is
        // cutoff * sqrt(cov_axis); one extra pixel of slack keeps the tiled
        // path bitwise equal to an exhaustive per-pixel pass.
        const double rx = cfg.sigma_cutoff * std::sqrt(s.cov_xx) + 1.0;
        const double ry = cfg.sigma_cutoff * std::sqrt(s.cov_yy) + 1.0;
        f.x0 = std::max(0, static_cast<int>(std::floor(s.x - rx)));
        f.x1 = std::min(k.width - 1, static_cast<int>(std::ceil(s.x + rx)));
        f.y0 = std::max(0, static_cast<int>(std::floor(s.y - ry)));
        f.y1 = std::min(k.height - 1, static_cast<int>(std::ceil(s.y + ry)));
        if (f.x0 > f.x1 || f.y0 > f.y1) continue;
        flats.push_back(f);
    }
    return flats;
}

}  // namespace render_detail

FeatureImage render(const WorldScene& scene, const RigidPose& camera, const Intrinsics& k,
                    const RenderConfig& cfg) {
    cfg.validate();
    if (k.width < 1 || k.height < 1) throw std::invalid_argument("render: zero-sized image");

    using render_detail::FlatSplat;
    const std::vector<FlatSplat> flats = render_detail::prepare_splats(scene, camera, k, cfg);

    const int w = k.width, h = k.height;
    const double cutoff_sq = cfg.sigma_cutoff * cfg.sigma_cutoff;

    constexpr int kTile = 16;
    const int tiles_x = (w + kTile - 1) / kTile;
    const int tiles_y = (h + kTile - 1) / kTile;
    const int tile_count = tiles_x * tiles_y;

    // Depth order is preserved inside each tile list because flats are
    // already sorted.
    std::vector<std::vector<int>> tile_splats(tile_count);
#pragma omp parallel for schedule(static)
    for (int t = 0; t < tile_count; ++t) {
        const int tx0 = (t % tiles_x) * kTile, ty0 = (t / tiles_x) * kTile;
        const int tx1 = std::min(w - 1, tx0 + kTile - 1), ty1 = std::min(h - 1, ty0 + kTile - 1);
        for (int i = 0; i < static_cast<int>(flats.size()); ++i) {
            const FlatSplat& f = flats[i];
            if (f.x1 < tx0 || f.x0 > tx1 || f.y1 < ty0 || f.y0 > ty1) continue;
            tile_splats[t].push_back(i);
        }
    }

    FeatureImage img(w, h, 12);
    double* plane = img.data().data();
    const std::size_t plane_stride = static_cast<std::size_t>(w) * h;

#pragma omp parallel for schedule(static)
    for (int t = 0; t < tile_count; ++t) {
        const int tx0 = (t % tiles_x) * kTile, ty0 = (t / tiles_x) * kTile;
        const int tx1 = std::min(w - 1, tx0 + kTile - 1), ty1 = std::min(h - 1, ty0 + kTile - 1);
        const std::vector<int>& list = tile_splats[t];
        for (int y = ty0; y <= ty1; ++y) {
            const double py = y + 0.5;
            for (int x = tx0; x <= tx1; ++x) {
                const double px = x + 0.5;
                double acc[12] = {0};
                double transmittance = 1.0;
                for (int i : list) {
                    if (transmittance < cfg.transmittance_floor) break;
                    render_detail::composite_step(flats[i], px, py, cutoff_sq, cfg.alpha_epsilon,
                                                  acc, transmittance);
                }
                const std::size_t at = static_cast<std::size_t>(y) * w + x;
                for (int c = 0; c < 12; ++c) {
                    double v = acc[c] + transmittance * cfg.background[c];
                    if (c < 3) v = std::clamp(v, 0.0, 1.0);
                    plane[plane_stride * c + at] = v;
                }
            }
        }
    }
    return img;
}

FeatureImage render_rgb(const WorldScene& scene, const RigidPose& camera, const Intrinsics& k,
                        const RenderConfig& cfg) {
    return render(scene, camera, k, cfg).rgb();
}

}  // namespace ssplat
