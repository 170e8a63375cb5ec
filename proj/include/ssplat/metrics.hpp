// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ssplat/gaussian.hpp"
#include "ssplat/image.hpp"
#include "ssplat/render.hpp"

namespace ssplat {

// -10 log10(MSE) for images in [0, 1]; identical images cap at 100 dB.
double psnr(const FeatureImage& a, const FeatureImage& b);

// Single-scale SSIM, 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
// C2 = 0.03^2, averaged over valid windows and channels.
double ssim(const FeatureImage& a, const FeatureImage& b);

// Sorted per-pair angular errors plus the thresholds they are scored at.
struct PoseErrorCurve {
    std::vector<double> errors_deg;      // ascending, one per ordered pair
    std::vector<double> thresholds_deg;  // {5, 10, 20} by default; {5, 10, 15} selectable

    // Exact integral of the cumulative recall curve up to each threshold,
    // normalized by the threshold; errors exactly at a threshold do not
    // count (strict-less accumulation).
    std::vector<double> auc() const;
};

// Per ordered pair (i != j): max of the relative-rotation geodesic error and
// the relative-translation direction error, in degrees.
PoseErrorCurve pose_error_curve(const std::vector<RigidPose>& pred, const std::vector<RigidPose>& gt,
                                const std::vector<double>& thresholds_deg = {5.0, 10.0, 20.0});

std::vector<double> pose_auc(const std::vector<RigidPose>& pred, const std::vector<RigidPose>& gt,
                             const std::vector<double>& thresholds_deg = {5.0, 10.0, 20.0});

struct LossWeights {
    double mse = 1.0;
    double lpips_placeholder = 0.0;  // perceptual term needs a pretrained net; reported as 0
    double intrinsic = 0.5;
    double extrinsic = 0.1;
    double opacity = 0.01;
    double huber_delta = 1.0;
    double lambda_t = 1.0;
};

// Pairwise relative pose loss over all ordered pairs: geodesic rotation angle
// plus lambda_t * element-summed Huber penalty on the relative-translation
// difference, averaged by 1/(N(N-1)).
double loss_extrinsic(const std::vector<RigidPose>& pred, const std::vector<RigidPose>& gt,
                      const LossWeights& weights = {});

struct FocalPair {
    double fx = 0.0, fy = 0.0;
};
// Mean l2 error between predicted and ground-truth (fx, fy) pairs.
double loss_intrinsic(const std::vector<FocalPair>& pred, const std::vector<FocalPair>& gt);

// Mean opacity (l1 penalty); 0 for an empty scene.
double loss_opacity(const WorldScene& scene);

struct LossBreakdown {
    double mse = 0.0;
    double lpips = 0.0;  // out of scope, always 0
    double intrinsic = 0.0;
    double extrinsic = 0.0;
    double opacity = 0.0;
    double total = 0.0;
};

// Weighted multi-task loss over the eight target views.
LossBreakdown total_loss(const std::vector<FeatureImage>& renders,
                         const std::vector<FeatureImage>& targets,
                         const std::vector<RigidPose>& pred_cams, const std::vector<RigidPose>& gt_cams,
                         const std::vector<FocalPair>& pred_focals, const std::vector<FocalPair>& gt_focals,
                         const WorldScene& scene, const LossWeights& weights = {});

struct PoseOptimizationResult {
    RigidPose pose;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> best_loss_history;  // per iteration, non-increasing
};

// Gradient descent on the rendering MSE over a 6-d local pose chart
// (rotation in radians, translation pre-scaled by the scene extent).
// Gradients by central differences (step 1e-4), step length by backtracking
// halving from 1.0; the best-loss iterate is returned, so the best loss is
// monotone by construction.
PoseOptimizationResult optimize_target_pose(const WorldScene& scene, const FeatureImage& target,
                                            const Intrinsics& k, const RigidPose& init,
                                            int iterations = 100, const RenderConfig& cfg = {});

// Rendering MSE used by the optimizer (RGB channels).
double render_mse(const WorldScene& scene, const FeatureImage& target, const Intrinsics& k,
                  const RigidPose& pose, const RenderConfig& cfg = {});

// Central-difference gradient of render_mse in the optimizer's 6-d chart
// (rotation radians, translation in scene-scale units).
std::array<double, 6> pose_loss_gradient(const WorldScene& scene, const FeatureImage& target,
                                         const Intrinsics& k, const RigidPose& pose,
                                         const RenderConfig& cfg = {}, double step = 1e-4);

// Chart retraction used by the optimizer: pose o (Exp(omega), tau * scene_scale).
RigidPose apply_pose_delta(const RigidPose& pose, const std::array<double, 6>& delta,
                           double scene_scale);

// Bounding-box diagonal of the scene means (>= 1e-6; 1 for an empty scene).
double scene_extent(const WorldScene& scene);

}  // namespace ssplat
