// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ssplat/metrics.hpp"
#include "ssplat/synthetic.hpp"

namespace ssplat {

enum class EvalMode { posed, unposed };

struct EvalConfig {
    int context_count = 24;
    EvalMode mode = EvalMode::posed;
    std::vector<double> thresholds_deg = {5.0, 10.0, 20.0};
    uint64_t seed = 0;
    int pose_opt_iterations = 100;
};

struct TargetMetrics {
    int frame = 0;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct EvaluationReport {
    std::vector<int> context_frames;
    std::vector<TargetMetrics> targets;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    std::vector<double> thresholds_deg;
    std::vector<double> auc;  // empty when no predicted poses were supplied
    bool has_loss = false;
    LossBreakdown loss;

    // Values at 6 significant digits.
    std::string to_text() const;
};

// Protocol: context via farthest-point sampling on ground-truth camera
// positions; remaining frames split into 8 bins (remainder to the last bin),
// one seeded sample per bin. Posed mode renders targets at ground-truth
// poses; unposed mode optimizes the target pose starting from the nearest
// context view's predicted pose.
EvaluationReport evaluate(const SyntheticScene& gt, const WorldScene& reconstruction,
                          const std::vector<RigidPose>& predicted_poses,
                          const std::vector<FocalPair>& predicted_focals, const EvalConfig& cfg,
                          const RenderConfig& rcfg = {});

}  // namespace ssplat
