// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <numeric>

#include "ssplat/metrics.hpp"
#include "test_util.hpp"

using namespace ssplat;
using namespace ssplat::testutil;

TEST_SUITE_BEGIN("metrics");

namespace {

FeatureImage constant_image(int w, int h, double r, double g, double b) {
    FeatureImage img(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.at(0, y, x) = r;
            img.at(1, y, x) = g;
            img.at(2, y, x) = b;
        }
    return img;
}

std::vector<RigidPose> random_poses(Rng& rng, int n, double scale = 1.0) {
    std::vector<RigidPose> poses;
    for (int i = 0; i < n; ++i) poses.push_back(random_pose(rng, scale));
    return poses;
}

WorldScene opt_scene(uint64_t seed) {
    Rng rng(seed);
    WorldScene scene;
    for (int i = 0; i < 80; ++i) {
        GaussianPrimitive g = random_gaussian(rng);
        g.mean = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(2.5, 5.5)};
        g.opacity = rng.uniform(0.5, 0.95);
        scene.append(g, 0);
    }
    return scene;
}

const Intrinsics kOptCam{36.0, 36.0, 16.0, 16.0, 32, 32};

}  // namespace

TEST_CASE("psnr") {
    const FeatureImage a = constant_image(16, 16, 0.0, 0.0, 0.0);
    CHECK(psnr(a, a) == 100.0);

    const FeatureImage b = constant_image(16, 16, 0.1, 0.1, 0.1);
    CHECK(std::fabs(psnr(a, b) - 20.0) < 1e-9);  // MSE exactly 0.01
    CHECK(psnr(a, b) == psnr(b, a));

    CHECK_THROWS_AS(psnr(a, constant_image(8, 16, 0, 0, 0)), std::invalid_argument);
}

TEST_CASE("ssim") {
    Rng rng(40);
    FeatureImage a(16, 16, 3);
    for (auto& v : a.data()) v = rng.uniform();
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    // Checkerboard against its negative has structure inverted.
    FeatureImage cb(16, 16, 3), neg(16, 16, 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                const double v = ((x + y) % 2 == 0) ? 1.0 : 0.0;
                cb.at(c, y, x) = v;
                neg.at(c, y, x) = 1.0 - v;
            }
    CHECK(ssim(cb, neg) < 0.0);

    FeatureImage b(16, 16, 3);
    for (auto& v : b.data()) v = rng.uniform();
    CHECK(std::fabs(ssim(a, b) - ssim(b, a)) <= 1e-12);

    CHECK_THROWS_AS(ssim(constant_image(10, 16, 0, 0, 0), constant_image(10, 16, 0, 0, 0)),
                    std::invalid_argument);
}

namespace {

// Independent per-pair error + cumulative-curve integration via the sorted
// step function.
std::vector<double> auc_oracle(const std::vector<RigidPose>& pred, const std::vector<RigidPose>& gt,
                               const std::vector<double>& thresholds) {
    std::vector<double> errors;
    const int n = static_cast<int>(pred.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Mat3 rp = pred[i].rotation.transposed() * pred[j].rotation;
            const Vec3 tp = pred[i].rotation.transposed() * (pred[j].translation - pred[i].translation);
            const Mat3 rg = gt[i].rotation.transposed() * gt[j].rotation;
            const Vec3 tg = gt[i].rotation.transposed() * (gt[j].translation - gt[i].translation);
            const double rot = rotation_angle(rg.transposed() * rp) * 180.0 / kPi;
            const double trans = translation_direction_angle(tp, tg) * 180.0 / kPi;
            errors.push_back(std::max(rot, trans));
        }
    std::sort(errors.begin(), errors.end());
    std::vector<double> out;
    for (double tau : thresholds) {
        // Piecewise integration of the step recall curve.
        double area = 0.0;
        const int m = static_cast<int>(errors.size());
        for (int k = 0; k < m; ++k) {
            const double lo = errors[k];
            const double hi = k + 1 < m ? std::min(errors[k + 1], tau) : tau;
            if (lo >= tau) break;
            area += (hi - lo) * (static_cast<double>(k + 1) / m);
        }
        out.push_back(area / tau);
    }
    return out;
}

}  // namespace

TEST_CASE("pose auc") {
    Rng rng(41);
    const auto poses = random_poses(rng, 5);
    for (double v : pose_auc(poses, poses)) CHECK(std::fabs(v - 1.0) <= 1e-9);

    // Errors exactly at the threshold do not count (strict-less rule).
    std::vector<RigidPose> pred{RigidPose::identity(),
                                RigidPose(rotation_z(5.0 * kPi / 180.0), {1, 0, 0})};
    std::vector<RigidPose> gt{RigidPose::identity(), RigidPose(Mat3::identity(), {1, 0, 0})};
    const double exact_error = rotation_angle(relative(pred[0], pred[1]).rotation) * 180.0 / kPi;
    const auto at_threshold = pose_auc(pred, gt, {exact_error});
    CHECK(at_threshold[0] == 0.0);

    // Exhaustive oracle on 4 random poses.
    const auto p4 = random_poses(rng, 4), g4 = random_poses(rng, 4);
    const std::vector<double> thresholds{5.0, 10.0, 20.0};
    const auto got = pose_auc(p4, g4, thresholds);
    const auto expected = auc_oracle(p4, g4, thresholds);
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        CHECK(std::fabs(got[i] - expected[i]) < 1e-9);

    CHECK_THROWS_AS(pose_auc(p4, random_poses(rng, 3)), std::invalid_argument);
    CHECK_THROWS_AS(pose_auc({RigidPose::identity()}, {RigidPose::identity()}), std::invalid_argument);
}

TEST_CASE("pose auc degrades monotonically with rotation noise") {
    const std::vector<double> noise_deg{0.0, 1.0, 5.0, 20.0};
    std::vector<double> mean_auc;
    for (double sigma : noise_deg) {
        double total = 0.0;
        for (uint64_t seed = 0; seed < 50; ++seed) {
            Rng rng(seed * 131 + 7);
            const auto gt = random_poses(rng, 6, 2.0);
            std::vector<RigidPose> pred;
            for (const auto& p : gt) {
                const double angle = sigma * kPi / 180.0 * rng.normal();
                pred.emplace_back(p.rotation * rotation_about_axis(rng.unit_vector(), angle),
                                  p.translation);
            }
            total += pose_auc(pred, gt, {10.0})[0];
        }
        mean_auc.push_back(total / 50.0);
    }
    CHECK(std::fabs(mean_auc[0] - 1.0) <= 1e-9);
    for (std::size_t i = 1; i < mean_auc.size(); ++i) CHECK(mean_auc[i] < mean_auc[i - 1]);
}

TEST_CASE("extrinsic loss") {
    Rng rng(42);
    const auto poses = random_poses(rng, 5);
    CHECK(loss_extrinsic(poses, poses) <= 1e-9);

    // Pair symmetry of the rotation term.
    for (int i = 0; i < 100; ++i) {
        const Mat3 r = random_rotation(rng), s = random_rotation(rng);
        CHECK(std::fabs(rotation_angle(r.transposed() * s) - rotation_angle(s.transposed() * r)) <=
              1e-12);
    }

    // Invariance under a shared global rigid transform.
    const auto pred = random_poses(rng, 4), gt = random_poses(rng, 4);
    const double base = loss_extrinsic(pred, gt);
    for (int i = 0; i < 1000; ++i) {
        const RigidPose g = random_pose(rng);
        std::vector<RigidPose> moved;
        for (const auto& p : pred) moved.push_back(compose(g, p));
        CHECK(std::fabs(loss_extrinsic(moved, gt) - base) < 1e-9);
    }

    // Explicit double-loop oracle at N = 3.
    const auto p3 = random_poses(rng, 3), g3 = random_poses(rng, 3);
    LossWeights w;
    double expected = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            const RigidPose rp = relative(p3[i], p3[j]), rg = relative(g3[i], g3[j]);
            expected += rotation_angle(rg.rotation.transposed() * rp.rotation);
            const Vec3 d = rp.translation - rg.translation;
            for (int c = 0; c < 3; ++c) {
                const double ax = std::fabs(d[c]);
                expected += w.lambda_t *
                            (ax <= w.huber_delta ? 0.5 * d[c] * d[c]
                                                 : w.huber_delta * (ax - 0.5 * w.huber_delta));
            }
        }
    expected /= 6.0;
    CHECK(std::fabs(loss_extrinsic(p3, g3, w) - expected) < 1e-9);

    CHECK_THROWS_AS(loss_extrinsic({RigidPose::identity()}, {RigidPose::identity()}),
                    std::invalid_argument);
}

TEST_CASE("extrinsic loss and auc are permutation equivariant") {
    Rng rng(43);
    const auto pred = random_poses(rng, 5), gt = random_poses(rng, 5);
    std::vector<int> perm{3, 1, 4, 0, 2};
    std::vector<RigidPose> pred_p, gt_p;
    for (int i : perm) {
        pred_p.push_back(pred[i]);
        gt_p.push_back(gt[i]);
    }
    CHECK(std::fabs(loss_extrinsic(pred, gt) - loss_extrinsic(pred_p, gt_p)) <= 1e-12);
    const auto a = pose_auc(pred, gt), b = pose_auc(pred_p, gt_p);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-12);
}

TEST_CASE("intrinsic loss") {
    CHECK(loss_intrinsic({{100, 100}}, {{100, 100}}) == 0.0);
    CHECK(std::fabs(loss_intrinsic({{110, 110}}, {{100, 100}}) - std::sqrt(200.0)) < 1e-12);
    const double one = loss_intrinsic({{110, 105}}, {{100, 100}});
    const double two = loss_intrinsic({{120, 110}}, {{100, 100}});
    CHECK(std::fabs(two - 2.0 * one) < 1e-12);
    CHECK_THROWS_AS(loss_intrinsic({{1, 1}}, {}), std::invalid_argument);
}

TEST_CASE("opacity loss") {
    CHECK(loss_opacity(WorldScene{}) == 0.0);
    Rng rng(44);
    WorldScene scene;
    GaussianPrimitive g = random_gaussian(rng);
    g.opacity = 0.2;
    scene.append(g, 0);
    g.opacity = 0.4;
    scene.append(g, 0);
    CHECK(loss_opacity(scene) == doctest::Approx(0.3).epsilon(1e-15));

    WorldScene reversed;
    reversed.append(scene.primitives[1], 0);
    reversed.append(scene.primitives[0], 0);
    CHECK(loss_opacity(reversed) == loss_opacity(scene));

    WorldScene zeros;
    g.opacity = 0.0;
    zeros.append(g, 0);
    CHECK(loss_opacity(zeros) == 0.0);
}

TEST_CASE("total loss") {
    Rng rng(45);
    const auto cams = random_poses(rng, 4);
    std::vector<FeatureImage> renders, targets;
    for (int i = 0; i < 8; ++i) {
        FeatureImage img(16, 16, 3);
        for (auto& v : img.data()) v = rng.uniform();
        renders.push_back(img);
        targets.push_back(img);
    }
    std::vector<FocalPair> focals{{100, 100}, {100, 100}, {100, 100}, {100, 100}};

    WorldScene zero_opacity;
    GaussianPrimitive g = random_gaussian(rng);
    g.opacity = 0.0;
    zero_opacity.append(g, 0);

    const LossBreakdown perfect =
        total_loss(renders, targets, cams, cams, focals, focals, zero_opacity);
    CHECK(perfect.total == 0.0);

    // A perturbed case: the breakdown must recombine to the total under the
    // default weights (mse 1.0, extrinsic 0.1).
    auto noisy = renders;
    for (auto& img : noisy)
        for (auto& v : img.data()) v += 0.01 * rng.normal();
    std::vector<RigidPose> noisy_cams;
    for (const auto& c : cams)
        noisy_cams.push_back(compose(c, RigidPose(rotation_z(0.02), {0.01, 0, 0})));
    WorldScene scene;
    g.opacity = 0.5;
    scene.append(g, 0);

    LossWeights w;
    const LossBreakdown b =
        total_loss(noisy, targets, noisy_cams, cams, {{110, 100}, {100, 100}, {100, 100}, {100, 100}},
                   focals, scene, w);
    const double recombined = w.mse * b.mse + w.lpips_placeholder * b.lpips + w.intrinsic * b.intrinsic +
                              w.extrinsic * b.extrinsic + w.opacity * b.opacity;
    CHECK(std::fabs(b.total - recombined) < 1e-12);
    CHECK(b.lpips == 0.0);
    CHECK(w.mse == 1.0);
    CHECK(w.extrinsic == 0.1);
    CHECK(w.intrinsic == 0.5);
    CHECK(w.opacity == 0.01);

    // Only the extrinsic term nonzero: total = 0.1 * extrinsic.
    const LossBreakdown ext_only =
        total_loss(renders, targets, noisy_cams, cams, focals, focals, zero_opacity, w);
    CHECK(std::fabs(ext_only.total - 0.1 * ext_only.extrinsic) < 1e-15);
}

TEST_CASE("pose optimization is stationary at the true pose") {
    const WorldScene scene = opt_scene(46);
    const RigidPose truth = RigidPose::identity();
    const FeatureImage target = render_rgb(scene, truth, kOptCam);

    const auto result = optimize_target_pose(scene, target, kOptCam, truth, 10);
    CHECK(result.final_loss <= result.initial_loss);
    CHECK(rotation_angle(truth.rotation.transposed() * result.pose.rotation) * 180.0 / kPi < 0.05);
    CHECK((result.pose.translation - truth.translation).norm() < 1e-3 * scene_extent(scene));
}

TEST_CASE("pose optimization recovers a perturbed initialization") {
    const WorldScene scene = opt_scene(47);
    const RigidPose truth = RigidPose::identity();
    const FeatureImage target = render_rgb(scene, truth, kOptCam);

    Rng rng(48);
    const RigidPose init(truth.rotation * rotation_about_axis(rng.unit_vector(), 2.0 * kPi / 180.0),
                         truth.translation + rng.unit_vector() * (0.02 * scene_extent(scene)));
    const auto result = optimize_target_pose(scene, target, kOptCam, init, 100);

    CHECK(rotation_angle(truth.rotation.transposed() * result.pose.rotation) * 180.0 / kPi <= 0.2);
    CHECK(result.final_loss * 10.0 <= result.initial_loss);
    for (std::size_t i = 1; i < result.best_loss_history.size(); ++i)
        CHECK(result.best_loss_history[i] <= result.best_loss_history[i - 1]);
}

TEST_CASE("finite-difference gradient agrees with the Richardson estimate") {
    const WorldScene scene = opt_scene(49);
    const FeatureImage target = render_rgb(scene, RigidPose::identity(), kOptCam);
    Rng rng(50);
    const RigidPose init(rotation_about_axis(rng.unit_vector(), 2.0 * kPi / 180.0),
                         rng.unit_vector() * 0.02);

    const auto g_h = pose_loss_gradient(scene, target, kOptCam, init, RenderConfig{}, 1e-4);
    const auto g_2h = pose_loss_gradient(scene, target, kOptCam, init, RenderConfig{}, 2e-4);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double richardson = (4.0 * g_h[i] - g_2h[i]) / 3.0;
        num += (g_h[i] - richardson) * (g_h[i] - richardson);
        den += richardson * richardson;
    }
    CHECK(std::sqrt(num) <= 1e-2 * std::sqrt(den));
}

TEST_SUITE_END();
