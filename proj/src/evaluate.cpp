// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "ssplat/rng.hpp"

namespace ssplat {

namespace {

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string EvaluationReport::to_text() const {
    std::string out = "context frames:";
    for (int f : context_frames) out += " " + std::to_string(f);
    out += "\n";
    for (const auto& t : targets)
        out += "target frame=" + std::to_string(t.frame) + " psnr=" + fmt6(t.psnr) +
               " ssim=" + fmt6(t.ssim) + "\n";
    out += "aggregate psnr=" + fmt6(mean_psnr) + " ssim=" + fmt6(mean_ssim) + "\n";
    for (std::size_t i = 0; i < auc.size(); ++i)
        out += "auc@" + fmt6(thresholds_deg[i]) + "deg=" + fmt6(auc[i]) + "\n";
    if (has_loss) {
        out += "loss mse=" + fmt6(loss.mse) + " lpips=" + fmt6(loss.lpips) +
               " (excluded: needs a pretrained perceptual net) intrinsic=" + fmt6(loss.intrinsic) +
               " extrinsic=" + fmt6(loss.extrinsic) + " opacity=" + fmt6(loss.opacity) +
               " total=" + fmt6(loss.total) + "\n";
    }
    return out;
}

EvaluationReport evaluate(const SyntheticScene& gt, const WorldScene& reconstruction,
                          const std::vector<RigidPose>& predicted_poses,
                          const std::vector<FocalPair>& predicted_focals, const EvalConfig& cfg,
                          const RenderConfig& rcfg) {
    const int frames = gt.frame_count();
    if (cfg.context_count < 1 || cfg.context_count > frames)
        throw std::invalid_argument("evaluate: context count out of range");
    if (frames - cfg.context_count < 8)
        throw std::invalid_argument("evaluate: insufficient frames for 8 target bins");
    if (!predicted_poses.empty() && static_cast<int>(predicted_poses.size()) != frames)
        throw std::invalid_argument("evaluate: predicted poses must cover every frame");

    EvaluationReport report;
    report.thresholds_deg = cfg.thresholds_deg;

    std::vector<Vec3> positions;
    positions.reserve(frames);
    for (const auto& p : gt.poses) positions.push_back(p.translation);
    report.context_frames = farthest_point_sample(positions, cfg.context_count);

    std::vector<char> in_context(frames, 0);
    for (int f : report.context_frames) in_context[f] = 1;
    std::vector<int> remaining;
    for (int f = 0; f < frames; ++f)
        if (!in_context[f]) remaining.push_back(f);

    // 8 bins over the held-out frames, remainder to the last bin, one seeded
    // draw per bin.
    const int m = static_cast<int>(remaining.size());
    const int base = m / 8;
    std::vector<int> target_frames;
    Rng rng = Rng(cfg.seed).fork(0xE7A1);
    int at = 0;
    for (int bin = 0; bin < 8; ++bin) {
        const int size = bin == 7 ? m - base * 7 : base;
        target_frames.push_back(remaining[at + rng.uniform_int(0, size - 1)]);
        at += size;
    }

    const bool unposed = cfg.mode == EvalMode::unposed;
    if (unposed && predicted_poses.empty())
        throw std::invalid_argument("evaluate: unposed mode needs predicted poses");

    std::vector<FeatureImage> renders, targets;
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (int frame : target_frames) {
        const Intrinsics& k = gt.intrinsics[frame];
        const FeatureImage truth = render_rgb(gt.world, gt.poses[frame], k, rcfg);

        RigidPose render_pose = gt.poses[frame];
        if (unposed) {
            // Initialize from the nearest context view's predicted pose.
            int nearest = report.context_frames[0];
            double best = (gt.poses[nearest].translation - gt.poses[frame].translation).squared_norm();
            for (int c : report.context_frames) {
                const double d = (gt.poses[c].translation - gt.poses[frame].translation).squared_norm();
                if (d < best) {
                    best = d;
                    nearest = c;
                }
            }
            const RigidPose init = predicted_poses[nearest];
            render_pose =
                optimize_target_pose(reconstruction, truth, k, init, cfg.pose_opt_iterations, rcfg).pose;
        }

        const FeatureImage img = render_rgb(reconstruction, render_pose, k, rcfg);
        TargetMetrics tm;
        tm.frame = frame;
        tm.psnr = psnr(img, truth);
        tm.ssim = ssim(img, truth);
        report.targets.push_back(tm);
        psnr_sum += tm.psnr;
        ssim_sum += tm.ssim;
        renders.push_back(img);
        targets.push_back(truth);
    }
    report.mean_psnr = psnr_sum / 8.0;
    report.mean_ssim = ssim_sum / 8.0;

    if (!predicted_poses.empty()) {
        std::vector<RigidPose> ctx_pred, ctx_gt;
        std::vector<FocalPair> ctx_pred_f, ctx_gt_f;
        for (int c : report.context_frames) {
            ctx_pred.push_back(predicted_poses[c]);
            ctx_gt.push_back(gt.poses[c]);
            if (!predicted_focals.empty()) {
                ctx_pred_f.push_back(predicted_focals[c]);
                ctx_gt_f.push_back({gt.intrinsics[c].fx, gt.intrinsics[c].fy});
            }
        }
        report.auc = pose_auc(ctx_pred, ctx_gt, cfg.thresholds_deg);
        report.loss = total_loss(renders, targets, ctx_pred, ctx_gt, ctx_pred_f, ctx_gt_f,
                                 reconstruction, LossWeights{});
        report.has_loss = true;
    }
    return report;
}

}  // namespace ssplat
