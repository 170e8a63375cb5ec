// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: prints one pass/fail line per criterion and exits
// non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dense_oracle.hpp"
#include "ssplat/curriculum.hpp"
#include "ssplat/evaluate.hpp"
#include "ssplat/memory_report.hpp"
#include "ssplat/reference.hpp"
#include "ssplat/stream.hpp"
#include "test_util.hpp"

using namespace ssplat;
using namespace ssplat::testutil;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, double seconds) {
    std::printf("[%s] criterion %2d: %s (%.2fs)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                seconds);
    if (!pass) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// The seeded 32-frame orbit scene shared by criteria 3, 4 and 7.
SyntheticScene acceptance_scene() {
    SceneConfig cfg;
    cfg.gaussian_count = 220;
    cfg.extent = 1.6;
    cfg.frame_count = 32;
    cfg.orbit_radius = 4.0;
    cfg.orbit_height = 0.8;
    cfg.image_width = 48;
    cfg.image_height = 48;
    cfg.focal = 52.0;
    return generate_scene(cfg, 42);
}

// 1. Cache accounting reproduces the published numbers exactly.
void criterion_1() {
    Timer timer;
    bool pass = token_set_count(256, 8, 8) == 312;
    pass = pass && baseline_token_set_count(256, 18) == 4608;
    const double reduction = 100.0 * (1.0 - 312.0 / 4608.0);
    pass = pass && std::fabs(reduction - 93.2) < 0.05;
    for (int n = 100; n <= 100000 && pass; ++n) {
        const double r = 1.0 - static_cast<double>(token_set_count(n, 8, 8)) /
                                   static_cast<double>(baseline_token_set_count(n, 18));
        if (!(r > 0.90)) pass = false;
    }
    report(1, pass && timer.seconds() < 1.0,
           "token accounting: 312 / 4608 / 93.2%, >90% for all N >= 100", timer.seconds());
}

// 2. Compressed decode equals the masked dense-attention oracle; retain-all
//    matches the uncompressed reference bitwise.
void criterion_2() {
    Timer timer;
    bool pass = true;
    double worst = 0.0;
    for (uint64_t seed = 0; seed < 5 && pass; ++seed) {
        const StreamModel model(ModelProfile::toy(seed));
        std::vector<FeatureImage> frames;
        {
            Rng rng(seed * 1337 + 5);
            for (int i = 0; i < 40; ++i) {
                FeatureImage img(16, 16, 3);
                for (auto& v : img.data()) v = rng.uniform();
                frames.push_back(std::move(img));
            }
        }
        for (int n = 4; n <= 8 && pass; ++n) {
            for (int total = 8; total <= 40 && pass; ++total) {
                CompressedKvCache cache(model.profile(), CachePolicy::compressed);
                testoracle::MaskedDenseDecoder oracle(model);
                int at = 0;
                while (at < total) {
                    const int count = at == 0 ? 8 : std::min(n, total - at);
                    std::vector<FeatureImage> chunk(frames.begin() + at, frames.begin() + at + count);
                    const EncodedChunk encoded = model.encode_chunk(chunk);
                    const auto got = model.decode_chunk(encoded, cache);
                    const auto expected = oracle.decode_chunk(encoded.view_tokens);
                    const double err = testoracle::relative_error(got, expected);
                    worst = std::max(worst, err);
                    if (!(err < 1e-5)) pass = false;
                    at += count;
                }
                if (cache.token_set_count() !=
                    token_set_count(total, n, model.profile().cached_global_layers))
                    pass = false;
            }
        }
        // Degenerate-policy identity, bitwise.
        CompressedKvCache retain_all(model.profile(), CachePolicy::retain_all);
        ReferenceDecoder reference(model);
        int at = 0;
        while (at < 40) {
            const int count = at == 0 ? 8 : std::min(4, 40 - at);
            std::vector<FeatureImage> chunk(frames.begin() + at, frames.begin() + at + count);
            const EncodedChunk encoded = model.encode_chunk(chunk);
            const auto got = model.decode_chunk(encoded, retain_all);
            const auto expected = reference.decode_chunk(encoded);
            for (std::size_t v = 0; v < got.size(); ++v)
                if (got[v].a != expected[v].a) pass = false;
            at += count;
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "compressed decode vs masked dense oracle (worst rel err %.2e), retain-all bitwise",
                  worst);
    report(2, pass && timer.seconds() < 60.0, buf, timer.seconds());
}

// 3. Noiseless oracle + GT assembly round trip: >= 40 dB at all 8 protocol
//    targets.
void criterion_3() {
    Timer timer;
    const SyntheticScene scene = acceptance_scene();
    const StreamResult result =
        stream_reconstruct(scene, OracleNoise{}, AssemblyConfig{}, StreamOptions{});
    EvalConfig ecfg;
    ecfg.context_count = 24;
    const EvaluationReport report_data =
        evaluate(scene, result.scene, result.predicted_poses, result.predicted_focals, ecfg);
    bool pass = report_data.targets.size() == 8;
    double worst = 1e300;
    for (const auto& t : report_data.targets) {
        worst = std::min(worst, t.psnr);
        if (!(t.psnr >= 40.0)) pass = false;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "round-trip reconstruction, min target PSNR %.1f dB", worst);
    report(3, pass && timer.seconds() < 30.0, buf, timer.seconds());
}

// 4. Pose-mismatch sensitivity: median PSNR strictly decreasing over noise
//    0 -> 2 -> 5 degrees with predicted-pose assembly; ReCo tokens are
//    pose-sensitive.
void criterion_4() {
    Timer timer;
    const SyntheticScene scene = acceptance_scene();
    AssemblyConfig assembly;
    assembly.pose_source = PoseSource::predicted;

    auto median_psnr = [&](double sigma) {
        std::vector<double> values;
        for (uint64_t seed = 0; seed < 5; ++seed) {
            OracleNoise noise;
            noise.rotation_deg = sigma;
            noise.seed = 100 + seed;
            const StreamResult r = stream_reconstruct(scene, noise, assembly, StreamOptions{});
            EvalConfig ecfg;
            ecfg.context_count = 24;
            values.push_back(
                evaluate(scene, r.scene, r.predicted_poses, r.predicted_focals, ecfg).mean_psnr);
        }
        std::sort(values.begin(), values.end());
        return values[2];
    };
    const double p0 = median_psnr(0.0), p2 = median_psnr(2.0), p5 = median_psnr(5.0);
    bool pass = p0 > p2 && p2 > p5;

    // ReCo sensitivity on the same scene.
    const PatchifyWeights weights = PatchifyWeights::seeded(42);
    const FeatureImage obs = render_rgb(scene.world, scene.poses[0], scene.intrinsics[0]);
    const ConditioningTokens base = build_conditioning(scene.world, obs, scene.poses[0],
                                                       scene.intrinsics[0], scene.intrinsics[0], weights);
    const ConditioningTokens repeat = build_conditioning(scene.world, obs, scene.poses[0],
                                                         scene.intrinsics[0], scene.intrinsics[0], weights);
    const RigidPose nudged =
        compose(scene.poses[0], RigidPose(rotation_z(5.0 * kPi / 180.0), {0, 0, 0}));
    const ConditioningTokens moved = build_conditioning(scene.world, obs, nudged, scene.intrinsics[0],
                                                        scene.intrinsics[0], weights);
    double repeat_dist = 0.0, moved_dist = 0.0;
    for (std::size_t i = 0; i < base.data.size(); ++i) {
        repeat_dist = std::max(repeat_dist, std::fabs(base.data[i] - repeat.data[i]));
        moved_dist = std::max(moved_dist, std::fabs(base.data[i] - moved.data[i]));
    }
    pass = pass && repeat_dist == 0.0 && moved_dist > 0.0;

    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "median PSNR %.1f > %.1f > %.1f dB over noise 0/2/5 deg; ReCo pose-sensitive", p0,
                  p2, p5);
    report(4, pass && timer.seconds() < 300.0, buf, timer.seconds());
}

// 5. Loss and metric identities.
void criterion_5() {
    Timer timer;
    bool pass = true;
    Rng rng(2024);
    for (int i = 0; i < 1000 && pass; ++i) {
        std::vector<RigidPose> pred, gt;
        for (int v = 0; v < 3; ++v) {
            pred.push_back(random_pose(rng));
            gt.push_back(random_pose(rng));
        }
        if (!(loss_extrinsic(pred, pred) <= 1e-9)) pass = false;
        const Mat3 a = random_rotation(rng), b = random_rotation(rng);
        if (!(std::fabs(rotation_angle(a.transposed() * b) - rotation_angle(b.transposed() * a)) <=
              1e-9))
            pass = false;
        const RigidPose g = random_pose(rng);
        std::vector<RigidPose> moved;
        for (const auto& p : pred) moved.push_back(compose(g, p));
        if (!(std::fabs(loss_extrinsic(moved, gt) - loss_extrinsic(pred, gt)) <= 1e-9)) pass = false;
    }

    std::vector<RigidPose> perfect;
    for (int i = 0; i < 6; ++i) perfect.push_back(random_pose(rng));
    for (double v : pose_auc(perfect, perfect))
        if (!(std::fabs(v - 1.0) <= 1e-9)) pass = false;

    // Brute-force per-pair oracle at N = 4.
    std::vector<RigidPose> p4, g4;
    for (int i = 0; i < 4; ++i) {
        p4.push_back(random_pose(rng));
        g4.push_back(random_pose(rng));
    }
    const std::vector<double> thresholds{5.0, 10.0, 20.0};
    const auto got = pose_auc(p4, g4, thresholds);
    std::vector<double> errors;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j) continue;
            const RigidPose rp = relative(p4[i], p4[j]), rg = relative(g4[i], g4[j]);
            errors.push_back(std::max(rotation_angle(rg.rotation.transposed() * rp.rotation),
                                      translation_direction_angle(rp.translation, rg.translation)) *
                             180.0 / kPi);
        }
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        double area = 0.0;
        for (double e : errors)
            if (e < thresholds[t]) area += thresholds[t] - e;
        const double expected = area / (errors.size() * thresholds[t]);
        if (!(std::fabs(got[t] - expected) <= 1e-9)) pass = false;
    }

    // PSNR of a uniform 0.1 difference is exactly 20 dB.
    FeatureImage black(16, 16, 3), grey(16, 16, 3);
    for (auto& v : grey.data()) v = 0.1;
    if (!(std::fabs(psnr(black, grey) - 20.0) <= 1e-9)) pass = false;

    report(5, pass, "extrinsic-loss identities, pose AUC oracle, PSNR anchor", timer.seconds());
}

// 6. Scale-alignment invariance under uniform GT rescaling.
void criterion_6() {
    Timer timer;
    Rng rng(66);
    std::vector<std::vector<GaussianPrimitive>> locals(8);
    for (auto& view : locals)
        for (int i = 0; i < 4; ++i) view.push_back(random_gaussian(rng));
    std::vector<RigidPose> gt, pred;
    for (int i = 0; i < 8; ++i) {
        gt.push_back(random_pose(rng, 2.0));
        pred.push_back(random_pose(rng, 1.2));
    }

    auto assembled_means = [&](double s) {
        std::vector<RigidPose> scaled;
        for (const auto& p : gt) scaled.emplace_back(p.rotation, p.translation * s);
        const double factor = scale_factor(scaled, pred, AlignmentMode::predicted_scale_consistent);
        WorldScene scene;
        assemble(scene, locals, scaled, factor, 0);
        std::vector<Vec3> means;
        for (const auto& g : scene.primitives) means.push_back(g.mean);
        return means;
    };

    const auto base = assembled_means(1.0);
    bool pass = true;
    double worst = 0.0;
    for (double s : {0.1, 10.0}) {
        const auto other = assembled_means(s);
        for (std::size_t i = 0; i < base.size(); ++i) {
            worst = std::max(worst, (base[i] - other[i]).norm());
            if (!((base[i] - other[i]).norm() <= 1e-9)) pass = false;
        }
    }

    // Factor is 0.5 when GT translations are exactly twice the predictions.
    std::vector<RigidPose> doubled;
    for (const auto& p : pred) doubled.emplace_back(p.rotation, p.translation * 2.0);
    const double factor = scale_factor(doubled, pred, AlignmentMode::predicted_scale_consistent);
    pass = pass && std::fabs(factor - 0.5) <= 1e-12;

    char buf[96];
    std::snprintf(buf, sizeof(buf), "alignment invariant to GT rescale (worst drift %.1e), factor 0.5",
                  worst);
    report(6, pass, buf, timer.seconds());
}

// 7. Target pose optimization from a 2 deg / 2% perturbed initialization.
void criterion_7() {
    Timer timer;
    const SyntheticScene scene = acceptance_scene();
    const int frame = 5;
    const RigidPose truth = scene.poses[frame];
    const FeatureImage target = render_rgb(scene.world, truth, scene.intrinsics[frame]);

    Rng rng(7);
    const RigidPose init(
        truth.rotation * rotation_about_axis(rng.unit_vector(), 2.0 * kPi / 180.0),
        truth.translation + rng.unit_vector() * (0.02 * trajectory_extent(scene.poses)));
    const auto result =
        optimize_target_pose(scene.world, target, scene.intrinsics[frame], init, 100);

    const double rot_err =
        rotation_angle(truth.rotation.transposed() * result.pose.rotation) * 180.0 / kPi;
    bool pass = rot_err <= 0.2;
    pass = pass && result.final_loss * 10.0 <= result.initial_loss;
    for (std::size_t i = 1; i < result.best_loss_history.size(); ++i)
        if (result.best_loss_history[i] > result.best_loss_history[i - 1]) pass = false;

    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "pose optimization: rotation error %.3f deg, MSE reduced %.0fx, monotone", rot_err,
                  result.initial_loss / std::max(result.final_loss, 1e-300));
    report(7, pass && timer.seconds() < 120.0, buf, timer.seconds());
}

// 8. Byte-identical reconstruction across repeat runs and worker counts.
void criterion_8() {
    Timer timer;
    const SyntheticScene scene = acceptance_scene();
    OracleNoise noise;
    noise.rotation_deg = 1.0;
    noise.seed = 8;

    auto run = [&] {
        const StreamResult r = stream_reconstruct(scene, noise, AssemblyConfig{}, StreamOptions{});
        const FeatureImage img = render(r.scene, scene.poses[0], scene.intrinsics[0]);
        return scene_to_text(r.scene) + fimg_to_bytes(img);
    };
    bool pass = true;
#ifdef _OPENMP
    const int save = omp_get_max_threads();
    omp_set_num_threads(1);
    const std::string one = run();
    omp_set_num_threads(2);
    const std::string two = run();
    omp_set_num_threads(4);
    const std::string four = run();
    omp_set_num_threads(save);
    pass = one == two && one == four && one == run();
#else
    pass = run() == run();
#endif
    report(8, pass, "byte-identical scene file and render across runs and worker counts",
           timer.seconds());
}

// 9. SE(3) render consistency.
void criterion_9() {
    Timer timer;
    const Intrinsics k(52.0, 52.0, 24.0, 24.0, 48, 48);
    Rng rng(9);
    bool pass = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        WorldScene local;
        for (int i = 0; i < 40; ++i) {
            GaussianPrimitive g = random_gaussian(rng);
            g.mean = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(2.5, 5.5)};
            local.append(g, 0);
        }
        const RigidPose pose = random_pose(rng, 2.0);
        WorldScene world;
        for (const auto& g : local.primitives) world.append(transform_local(g, pose), 0);

        const FeatureImage a = render(world, pose, k);
        const FeatureImage b = render(local, RigidPose::identity(), k);
        for (std::size_t i = 0; i < a.data().size(); ++i) {
            worst = std::max(worst, std::fabs(a.data()[i] - b.data()[i]));
            if (!(std::fabs(a.data()[i] - b.data()[i]) < 1e-4)) pass = false;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "SE(3) render consistency over 20 draws (worst %.1e per channel)",
                  worst);
    report(9, pass, buf, timer.seconds());
}

// 10. Curriculum schedule anchors.
void criterion_10() {
    Timer timer;
    bool pass = true;
    pass = pass && curriculum(0, 1, 1).max_views == 8;
    pass = pass && curriculum(1500, 1, 1).max_views == 8;
    pass = pass && curriculum(75000, 1, 1).max_views == 64;
    pass = pass && curriculum(150000, 1, 1).max_views == 64;
    pass = pass && curriculum(25000, 2, 1).min_chunk == 4;
    pass = pass && curriculum(50000, 2, 1).min_chunk == 4;
    for (int stage : {1, 2, 3})
        for (long long step : {0ll, 1500ll, 12500ll, 25000ll, 75000ll})
            for (uint64_t seed : {1ull, 2ull, 3ull}) {
                const CurriculumSample s = curriculum(step, stage, seed);
                if (s.chunk_sizes.empty() || s.chunk_sizes[0] != 8) pass = false;
            }
    report(10, pass, "curriculum anchors: ramp 8->64 at 1.5k/75k, min chunk 4 at 25k, first chunk 8",
           timer.seconds());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0)
        std::printf("acceptance: all 10 criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
