// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssplat {

namespace {

void check_same_shape(const FeatureImage& a, const FeatureImage& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
        throw std::invalid_argument("metric: image shape mismatch");
}

}  // namespace

double psnr(const FeatureImage& a, const FeatureImage& b) {
    check_same_shape(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.data().size());
    if (mse == 0.0) return 100.0;
    return std::min(100.0, -10.0 * std::log10(mse));
}

double ssim(const FeatureImage& a, const FeatureImage& b) {
    check_same_shape(a, b);
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    const int w = a.width(), h = a.height();
    if (w < kWindow || h < kWindow) throw std::invalid_argument("ssim: image smaller than the window");

    double kernel[kWindow][kWindow];
    double ksum = 0.0;
    for (int y = 0; y < kWindow; ++y)
        for (int x = 0; x < kWindow; ++x) {
            const double dy = y - (kWindow - 1) / 2.0, dx = x - (kWindow - 1) / 2.0;
            kernel[y][x] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
            ksum += kernel[y][x];
        }
    for (int y = 0; y < kWindow; ++y)
        for (int x = 0; x < kWindow; ++x) kernel[y][x] /= ksum;

    const int out_w = w - kWindow + 1, out_h = h - kWindow + 1;
    double channel_mean_sum = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        std::vector<double> ssim_map(static_cast<std::size_t>(out_w) * out_h);
#pragma omp parallel for schedule(static)
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
                for (int ky = 0; ky < kWindow; ++ky)
                    for (int kx = 0; kx < kWindow; ++kx) {
                        const double wgt = kernel[ky][kx];
                        const double va = a.at(c, oy + ky, ox + kx);
                        const double vb = b.at(c, oy + ky, ox + kx);
                        mu_a += wgt * va;
                        mu_b += wgt * vb;
                        aa += wgt * va * va;
                        bb += wgt * vb * vb;
                        ab += wgt * va * vb;
                    }
                const double var_a = aa - mu_a * mu_a;
                const double var_b = bb - mu_b * mu_b;
                const double cov = ab - mu_a * mu_b;
                const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
                const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
                ssim_map[static_cast<std::size_t>(oy) * out_w + ox] = num / den;
            }
        }
        double s = 0.0;
        for (double v : ssim_map) s += v;  // fixed-order reduction
        channel_mean_sum += s / static_cast<double>(ssim_map.size());
    }
    return channel_mean_sum / a.channels();
}

namespace {

// max(rotation geodesic, translation direction) discrepancy per ordered pair,
// in degrees.
std::vector<double> pairwise_pose_errors(const std::vector<RigidPose>& pred,
                                         const std::vector<RigidPose>& gt) {
    const std::size_t n = pred.size();
    std::vector<double> errors;
    errors.reserve(n * (n - 1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const RigidPose rp = relative(pred[i], pred[j]);
            const RigidPose rg = relative(gt[i], gt[j]);
            const double rot = rotation_angle(rg.rotation.transposed() * rp.rotation);
            const double trans = translation_direction_angle(rp.translation, rg.translation);
            errors.push_back(std::max(rot, trans) * 180.0 / kPi);
        }
    return errors;
}

}  // namespace

PoseErrorCurve pose_error_curve(const std::vector<RigidPose>& pred, const std::vector<RigidPose>& gt,
                                const std::vector<double>& thresholds_deg) {
    if (pred.size() != gt.size()) throw std::invalid_argument("pose_auc: pose list length mismatch");
    if (pred.size() < 2) throw std::invalid_argument("pose_auc: need at least 2 poses");
    PoseErrorCurve curve;
    curve.errors_deg = pairwise_pose_errors(pred, gt);
    std::sort(curve.errors_deg.begin(), curve.errors_deg.end());
    curve.thresholds_deg = thresholds_deg;
    return curve;
}

std::vector<double> PoseErrorCurve::auc() const {
    std::vector<double> out;
    out.reserve(thresholds_deg.size());
    for (double tau : thresholds_deg) {
        // integral of the step recall curve: sum of (tau - e)+ over errors,
        // normalized by M * tau.
        double area = 0.0;
        for (double e : errors_deg)
            if (e < tau) area += tau - e;
        out.push_back(area / (static_cast<double>(errors_deg.size()) * tau));
    }
    return out;
}

std::vector<double> pose_auc(const std::vector<RigidPose>& pred, const std::vector<RigidPose>& gt,
                             const std::vector<double>& thresholds_deg) {
    return pose_error_curve(pred, gt, thresholds_deg).auc();
}

namespace {

double huber(double x, double delta) {
    const double ax = std::fabs(x);
    return ax <= delta ? 0.5 * x * x : delta * (ax - 0.5 * delta);
}

}  // namespace

double loss_extrinsic(const std::vector<RigidPose>& pred, const std::vector<RigidPose>& gt,
                      const LossWeights& weights) {
    if (pred.size() != gt.size()) throw std::invalid_argument("loss_extrinsic: pose list length mismatch");
    const std::size_t n = pred.size();
    if (n < 2) throw std::invalid_argument("loss_extrinsic: need at least 2 poses");

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const RigidPose rp = relative(pred[i], pred[j]);
            const RigidPose rg = relative(gt[i], gt[j]);
            const double rot = rotation_angle(rg.rotation.transposed() * rp.rotation);
            const Vec3 dt = rp.translation - rg.translation;
            const double trans = huber(dt.x, weights.huber_delta) + huber(dt.y, weights.huber_delta) +
                                 huber(dt.z, weights.huber_delta);
            sum += rot + weights.lambda_t * trans;
        }
    return sum / (static_cast<double>(n) * (n - 1));
}

double loss_intrinsic(const std::vector<FocalPair>& pred, const std::vector<FocalPair>& gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("loss_intrinsic: focal list length mismatch");
    if (pred.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dx = pred[i].fx - gt[i].fx, dy = pred[i].fy - gt[i].fy;
        sum += std::sqrt(dx * dx + dy * dy);
    }
    return sum / static_cast<double>(pred.size());
}

double loss_opacity(const WorldScene& scene) {
    if (scene.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& g : scene.primitives) sum += g.opacity;
    return sum / static_cast<double>(scene.size());
}

LossBreakdown total_loss(const std::vector<FeatureImage>& renders,
                         const std::vector<FeatureImage>& targets,
                         const std::vector<RigidPose>& pred_cams, const std::vector<RigidPose>& gt_cams,
                         const std::vector<FocalPair>& pred_focals, const std::vector<FocalPair>& gt_focals,
                         const WorldScene& scene, const LossWeights& weights) {
    if (renders.size() != targets.size()) throw std::invalid_argument("total_loss: render/target mismatch");

    LossBreakdown out;
    double mse_sum = 0.0;
    for (std::size_t i = 0; i < renders.size(); ++i) {
        check_same_shape(renders[i], targets[i]);
        double s = 0.0;
        for (std::size_t k = 0; k < renders[i].data().size(); ++k) {
            const double d = renders[i].data()[k] - targets[i].data()[k];
            s += d * d;
        }
        mse_sum += s / static_cast<double>(renders[i].data().size());
    }
    out.mse = renders.empty() ? 0.0 : mse_sum / static_cast<double>(renders.size());
    out.lpips = 0.0;
    out.intrinsic = loss_intrinsic(pred_focals, gt_focals);
    out.extrinsic = loss_extrinsic(pred_cams, gt_cams, weights);
    out.opacity = loss_opacity(scene);
    out.total = weights.mse * out.mse + weights.lpips_placeholder * out.lpips +
                weights.intrinsic * out.intrinsic + weights.extrinsic * out.extrinsic +
                weights.opacity * out.opacity;
    return out;
}

}  // namespace ssplat
