// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "ssplat/gaussian.hpp"
#include "ssplat/image.hpp"

namespace ssplat {

struct RenderConfig {
    std::array<double, 12> background{};  // zeros: the neutral element of compositing
    double sigma_cutoff = 3.0;
    double alpha_epsilon = 1.0 / 255.0;
    double near_plane = 0.01;
    double transmittance_floor = 1e-4;

    void validate() const;
};

// Screen-space footprint of one Gaussian: projected mean, regularized 2x2
// covariance (+0.3 px^2 diagonal) and view depth.
struct ScreenSplat {
    double x = 0.0, y = 0.0;
    double cov_xx = 0.0, cov_xy = 0.0, cov_yy = 0.0;
    double depth = 0.0;
};

// EWA projection through the camera and the perspective Jacobian at the
// view-space mean. Returns nullopt when the view depth is at or behind the
// near plane.
std::optional<ScreenSplat> project(const GaussianPrimitive& g, const RigidPose& camera,
                                   const Intrinsics& k, const RenderConfig& cfg = {});

// Forward-splats the scene to an H x W x 12 image (RGB + 9 feature channels).
// Splats are composited front-to-back in (view depth, scene index) order;
// output is bitwise identical for any tiling / worker count. RGB channels are
// clamped to [0, 1] on output, feature channels are left unclamped.
FeatureImage render(const WorldScene& scene, const RigidPose& camera, const Intrinsics& k,
                    const RenderConfig& cfg = {});

// RGB-only convenience wrapper.
FeatureImage render_rgb(const WorldScene& scene, const RigidPose& camera, const Intrinsics& k,
                        const RenderConfig& cfg = {});

// Projects the 9 feature channels of a 12-channel rendering onto their top-3
// principal components (power iteration with deflation, fixed seed), each
// output channel min-max normalized to [0, 1]. A constant feature image maps
// to all 0.5.
FeatureImage pca_visualize(const FeatureImage& img);

struct PcaProjection {
    FeatureImage image;
    std::array<std::array<double, 9>, 3> components{};  // zero rows when degenerate
    std::array<double, 3> eigenvalues{};
};
PcaProjection pca_project(const FeatureImage& img);

namespace render_detail {

// One splat flattened for compositing: conic (inverse 2d covariance),
// opacity, payload and a conservative pixel bounding box.
struct FlatSplat {
    double mx, my;
    double conic_a, conic_b, conic_c;
    double opacity;
    double payload[12];
    int x0, x1, y0, y1;  // inclusive
};

// One front-to-back compositing step, shared verbatim by the parallel
// renderer and the serial reference so their outputs stay bitwise equal.
inline void composite_step(const FlatSplat& s, double px, double py, double cutoff_sq,
                           double alpha_eps, double* acc, double& transmittance) {
    const double dx = px - s.mx;
    const double dy = py - s.my;
    const double d2 = s.conic_a * dx * dx + 2.0 * s.conic_b * dx * dy + s.conic_c * dy * dy;
    if (!(d2 <= cutoff_sq)) return;
    double alpha = s.opacity * std::exp(-0.5 * d2);
    if (alpha > 0.999) alpha = 0.999;
    if (alpha < alpha_eps) return;
    const double w = transmittance * alpha;
    for (int c = 0; c < 12; ++c) acc[c] += w * s.payload[c];
    transmittance *= (1.0 - alpha);
}

// Splats sorted by (depth, scene index) and flattened; exposed so the serial
// reference renders from exactly the same ordered input.
std::vector<FlatSplat> prepare_splats(const WorldScene& scene, const RigidPose& camera,
                                      const Intrinsics& k, const RenderConfig& cfg);

}  // namespace render_detail

}  // namespace ssplat
