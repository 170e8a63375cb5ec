// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <sstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssplat/evaluate.hpp"
#include "ssplat/memory_report.hpp"
#include "ssplat/rng.hpp"
#include "ssplat/stream.hpp"

namespace {

using namespace ssplat;

SyntheticScene load_inputs(const std::string& scene_path, const std::string& traj_path) {
    SyntheticScene s;
    s.world = load_scene(scene_path);
    const auto records = load_trajectory(traj_path);
    if (records.empty()) throw std::invalid_argument("trajectory file is empty");
    for (const auto& rec : records) {
        s.poses.push_back(rec.pose);
        if (!rec.intrinsics) throw std::invalid_argument("trajectory record is missing intrinsics");
        s.intrinsics.push_back(*rec.intrinsics);
    }
    return s;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

struct SynthArgs {
    uint64_t seed = 42;
    int count = 250;
    int frames = 32;
    std::string trajectory = "orbit";
    int width = 48, height = 48;
    double extent = 1.6, radius = 4.0, focal = 52.0;
    std::string out_scene = "scene.txt";
    std::string out_traj = "trajectory.jsonl";
};

int run_synth(const SynthArgs& args) {
    SceneConfig cfg;
    cfg.gaussian_count = args.count;
    cfg.frame_count = args.frames;
    cfg.image_width = args.width;
    cfg.image_height = args.height;
    cfg.extent = args.extent;
    cfg.orbit_radius = args.radius;
    cfg.focal = args.focal;
    if (args.trajectory == "orbit")
        cfg.trajectory = TrajectoryKind::orbit;
    else if (args.trajectory == "walk")
        cfg.trajectory = TrajectoryKind::random_walk;
    else if (args.trajectory == "zigzag")
        cfg.trajectory = TrajectoryKind::zigzag;
    else
        throw std::invalid_argument("unknown trajectory kind: " + args.trajectory);

    const SyntheticScene scene = generate_scene(cfg, args.seed);
    save_scene(args.out_scene, scene.world);
    save_trajectory(args.out_traj, scene.trajectory());
    std::printf("wrote %zu gaussians to %s, %d frames to %s\n", scene.world.size(),
                args.out_scene.c_str(), scene.frame_count(), args.out_traj.c_str());
    return 0;
}

struct ReconstructArgs {
    std::string scene, traj;
    int chunk_size = 8;
    std::string predictor = "oracle";
    double pose_noise_deg = 0.0, trans_noise = 0.0, depth_noise = 0.0;
    std::string assembly = "gt";
    std::string align = "intent";
    bool centers = false;
    std::string profile = "toy";
    bool no_compress = false;
    bool no_gt_intrinsics = false;
    uint64_t seed = 42;
    int workers = 0;
    std::string out = "reconstruction.txt";
    std::string log_path, pred_poses_path;
};

int run_reconstruct(const ReconstructArgs& args) {
#ifdef _OPENMP
    if (args.workers > 0) omp_set_num_threads(args.workers);
#endif
    const SyntheticScene input = load_inputs(args.scene, args.traj);

    PredictorKind predictor;
    if (args.predictor == "oracle") {
        OracleNoise noise;
        noise.rotation_deg = args.pose_noise_deg;
        noise.translation_frac = args.trans_noise;
        noise.depth_frac = args.depth_noise;
        noise.seed = args.seed;
        predictor = noise;
    } else if (args.predictor == "toy") {
        ModelProfile profile =
            args.profile == "paper" ? ModelProfile::paper_fidelity(args.seed) : ModelProfile::toy(args.seed);
        if (args.profile != "paper" && args.profile != "toy")
            throw std::invalid_argument("unknown profile: " + args.profile);
        predictor = profile;
    } else {
        throw std::invalid_argument("unknown predictor: " + args.predictor);
    }

    AssemblyConfig assembly;
    if (args.assembly == "gt")
        assembly.pose_source = PoseSource::ground_truth;
    else if (args.assembly == "pred")
        assembly.pose_source = PoseSource::predicted;
    else
        throw std::invalid_argument("unknown assembly mode: " + args.assembly);
    if (args.align == "intent")
        assembly.alignment_mode = AlignmentMode::predicted_scale_consistent;
    else if (args.align == "literal")
        assembly.alignment_mode = AlignmentMode::paper_literal;
    else
        throw std::invalid_argument("unknown alignment mode: " + args.align);
    assembly.scale_from_camera_centers = args.centers;

    StreamOptions options;
    options.chunk_size = args.chunk_size;
    options.compress = !args.no_compress;
    options.use_gt_intrinsics = !args.no_gt_intrinsics;
    options.seed = args.seed;

    const StreamResult result = stream_reconstruct(input, predictor, assembly, options);
    save_scene(args.out, result.scene);

    if (!args.pred_poses_path.empty()) {
        std::vector<TrajectoryRecord> records;
        for (std::size_t i = 0; i < result.predicted_poses.size(); ++i) {
            TrajectoryRecord rec;
            rec.frame = static_cast<int>(i);
            rec.pose = result.predicted_poses[i];
            rec.intrinsics = Intrinsics(result.predicted_focals[i].fx, result.predicted_focals[i].fy,
                                        input.intrinsics[i].cx, input.intrinsics[i].cy,
                                        input.intrinsics[i].width, input.intrinsics[i].height);
            records.push_back(rec);
        }
        save_trajectory(args.pred_poses_path, records);
    }

    if (!args.log_path.empty()) {
        nlohmann::json j;
        j["scale_factor"] = result.scale_factor;
        j["scene_size"] = result.scene.size();
        j["memory"] = {{"token_sets", result.memory.token_sets},
                       {"baseline", result.memory.baseline},
                       {"reduction_pct", result.memory.reduction_pct},
                       {"cache_bytes", result.memory.cache_bytes}};
        auto& chunks = j["chunks"] = nlohmann::json::array();
        for (const auto& c : result.chunks)
            chunks.push_back({{"chunk", c.chunk_index},
                              {"first_frame", c.first_frame},
                              {"frames", c.frame_count},
                              {"millis", c.millis},
                              {"cached_token_sets", c.cached_token_sets},
                              {"expected_token_sets", c.expected_token_sets},
                              {"cache_bytes", c.cache_bytes},
                              {"scene_size", c.scene_size}});
        write_text(args.log_path, j.dump(2) + "\n");
    }

    for (const auto& c : result.chunks)
        std::printf("chunk %d frames [%d..%d) %.2f ms cached=%d expected=%d scene=%zu\n",
                    c.chunk_index, c.first_frame, c.first_frame + c.frame_count, c.millis,
                    c.cached_token_sets, c.expected_token_sets, c.scene_size);
    std::printf("scale factor %.6g, wrote %zu gaussians to %s\n", result.scale_factor,
                result.scene.size(), args.out.c_str());
    return 0;
}

struct EvalArgs {
    std::string gt_scene, recon_scene, traj, pred_poses;
    int context = 24;
    bool unposed = false;
    std::string thresholds = "5,10,20";
    uint64_t seed = 42;
    int iters = 100;
    std::string report_path;
};

int run_eval(const EvalArgs& args) {
    SyntheticScene gt = load_inputs(args.gt_scene, args.traj);
    const WorldScene recon = load_scene(args.recon_scene);

    std::vector<RigidPose> pred_poses;
    std::vector<FocalPair> pred_focals;
    if (!args.pred_poses.empty()) {
        for (const auto& rec : load_trajectory(args.pred_poses)) {
            pred_poses.push_back(rec.pose);
            if (rec.intrinsics) pred_focals.push_back({rec.intrinsics->fx, rec.intrinsics->fy});
        }
        if (pred_focals.size() != pred_poses.size()) pred_focals.clear();
    }

    EvalConfig cfg;
    cfg.context_count = args.context;
    cfg.mode = args.unposed ? EvalMode::unposed : EvalMode::posed;
    cfg.seed = args.seed;
    cfg.pose_opt_iterations = args.iters;
    cfg.thresholds_deg.clear();
    std::stringstream parts(args.thresholds);
    std::string part;
    while (std::getline(parts, part, ','))
        if (!part.empty()) cfg.thresholds_deg.push_back(std::stod(part));
    if (cfg.thresholds_deg.empty()) throw std::invalid_argument("no thresholds given");

    const EvaluationReport report = evaluate(gt, recon, pred_poses, pred_focals, cfg);
    const std::string text = report.to_text();
    std::fputs(text.c_str(), stdout);
    if (!args.report_path.empty()) write_text(args.report_path, text);
    return 0;
}

struct CacheBenchArgs {
    std::vector<int> images = {8, 64, 100, 128, 256};
    std::vector<int> chunks = {8};
    std::string profile = "paper";
    bool no_measure = false;
    uint64_t seed = 42;
    std::string json_path;
};

int run_cache_bench(const CacheBenchArgs& args) {
    const ModelProfile profile = args.profile == "toy" ? ModelProfile::toy(args.seed)
                                                       : ModelProfile::paper_fidelity(args.seed);
    if (args.profile != "paper" && args.profile != "toy")
        throw std::invalid_argument("unknown profile: " + args.profile);
    const MemoryReport report = memory_report(args.images, args.chunks, profile, !args.no_measure);
    std::fputs(report.to_text().c_str(), stdout);
    if (!args.json_path.empty()) write_text(args.json_path, report.to_json());
    return 0;
}

struct PoseOptArgs {
    std::string scene, traj;
    int frame = 0;
    double perturb_deg = 2.0, perturb_frac = 0.02;
    int iters = 100;
    uint64_t seed = 42;
};

int run_pose_opt(const PoseOptArgs& args) {
    const SyntheticScene input = load_inputs(args.scene, args.traj);
    if (args.frame < 0 || args.frame >= input.frame_count())
        throw std::invalid_argument("frame outside the trajectory");

    const RigidPose truth = input.poses[args.frame];
    const Intrinsics& k = input.intrinsics[args.frame];
    const FeatureImage target = render_rgb(input.world, truth, k);

    Rng rng(args.seed);
    const double angle = args.perturb_deg * kPi / 180.0;
    const Vec3 axis = rng.unit_vector();
    const double extent = trajectory_extent(input.poses);
    const RigidPose init(truth.rotation * rotation_about_axis(axis, angle),
                         truth.translation + rng.unit_vector() * (args.perturb_frac * extent));

    const auto result = optimize_target_pose(input.world, target, k, init, args.iters);
    const double rot_before = rotation_angle(truth.rotation.transposed() * init.rotation) * 180.0 / kPi;
    const double rot_after =
        rotation_angle(truth.rotation.transposed() * result.pose.rotation) * 180.0 / kPi;
    std::printf("rotation error: %.4f deg -> %.4f deg\n", rot_before, rot_after);
    std::printf("rendering mse:  %.6g -> %.6g (%.1fx reduction)\n", result.initial_loss,
                result.final_loss,
                result.final_loss > 0.0 ? result.initial_loss / result.final_loss : 1e9);
    return 0;
}

struct RenderArgs {
    std::string scene, traj;
    int frame = 0;
    std::string out = "render.ppm";
    int workers = 0;
};

int run_render(const RenderArgs& args) {
#ifdef _OPENMP
    if (args.workers > 0) omp_set_num_threads(args.workers);
#endif
    const SyntheticScene input = load_inputs(args.scene, args.traj);
    if (args.frame < 0 || args.frame >= input.frame_count())
        throw std::invalid_argument("frame outside the trajectory");
    const FeatureImage img = render(input.world, input.poses[args.frame], input.intrinsics[args.frame]);
    if (args.out.size() >= 5 && args.out.substr(args.out.size() - 5) == ".fimg")
        save_fimg(args.out, img);
    else
        save_ppm(args.out, img);
    std::printf("wrote %s\n", args.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streamsplat: streaming Gaussian-splatting reconstruction engine"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene and trajectory");
    synth_cmd->add_option("--seed", synth.seed);
    synth_cmd->add_option("--count", synth.count);
    synth_cmd->add_option("--frames", synth.frames);
    synth_cmd->add_option("--trajectory", synth.trajectory)->check(CLI::IsMember({"orbit", "walk", "zigzag"}));
    synth_cmd->add_option("--width", synth.width);
    synth_cmd->add_option("--height", synth.height);
    synth_cmd->add_option("--extent", synth.extent);
    synth_cmd->add_option("--radius", synth.radius);
    synth_cmd->add_option("--focal", synth.focal);
    synth_cmd->add_option("--out-scene", synth.out_scene);
    synth_cmd->add_option("--out-traj", synth.out_traj);

    ReconstructArgs rec;
    auto* rec_cmd = app.add_subcommand("reconstruct", "stream the trajectory into a world scene");
    rec_cmd->add_option("--scene", rec.scene)->required();
    rec_cmd->add_option("--traj", rec.traj)->required();
    rec_cmd->add_option("--chunk-size", rec.chunk_size)->check(CLI::Range(1, 8));
    rec_cmd->add_option("--predictor", rec.predictor)->check(CLI::IsMember({"oracle", "toy"}));
    rec_cmd->add_option("--pose-noise-deg", rec.pose_noise_deg);
    rec_cmd->add_option("--trans-noise", rec.trans_noise);
    rec_cmd->add_option("--depth-noise", rec.depth_noise);
    rec_cmd->add_option("--assembly", rec.assembly)->check(CLI::IsMember({"gt", "pred"}));
    rec_cmd->add_option("--align", rec.align)->check(CLI::IsMember({"intent", "literal"}));
    rec_cmd->add_flag("--centers", rec.centers, "measure Scale() on camera centers");
    rec_cmd->add_option("--profile", rec.profile)->check(CLI::IsMember({"toy", "paper"}));
    rec_cmd->add_flag("--no-compress", rec.no_compress, "disable KV cache compression");
    rec_cmd->add_flag("--no-gt-intrinsics", rec.no_gt_intrinsics,
                      "render conditioning with predicted intrinsics");
    rec_cmd->add_option("--seed", rec.seed);
    rec_cmd->add_option("--workers", rec.workers);
    rec_cmd->add_option("--out", rec.out);
    rec_cmd->add_option("--log", rec.log_path);
    rec_cmd->add_option("--pred-poses", rec.pred_poses_path);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "metrics report for a reconstruction");
    eval_cmd->add_option("--gt-scene", eval_args.gt_scene)->required();
    eval_cmd->add_option("--recon-scene", eval_args.recon_scene)->required();
    eval_cmd->add_option("--traj", eval_args.traj)->required();
    eval_cmd->add_option("--pred-poses", eval_args.pred_poses);
    eval_cmd->add_option("--context", eval_args.context);
    eval_cmd->add_flag("--unposed", eval_args.unposed, "optimize target poses before rendering");
    auto* posed_flag = eval_cmd->add_flag("--posed", "render targets at ground-truth poses (default)");
    eval_cmd->add_option("--thresholds", eval_args.thresholds);
    eval_cmd->add_option("--seed", eval_args.seed);
    eval_cmd->add_option("--iters", eval_args.iters);
    eval_cmd->add_option("--report", eval_args.report_path);
    (void)posed_flag;

    CacheBenchArgs cb;
    auto* cb_cmd = app.add_subcommand("cache-bench", "token-set accounting table");
    cb_cmd->add_option("--images", cb.images);
    cb_cmd->add_option("--chunks", cb.chunks);
    cb_cmd->add_option("--profile", cb.profile)->check(CLI::IsMember({"toy", "paper"}));
    cb_cmd->add_flag("--no-measure", cb.no_measure, "skip live cache measurement");
    cb_cmd->add_option("--seed", cb.seed);
    cb_cmd->add_option("--json", cb.json_path);

    PoseOptArgs po;
    auto* po_cmd = app.add_subcommand("pose-opt", "single-view pose optimization demo");
    po_cmd->add_option("--scene", po.scene)->required();
    po_cmd->add_option("--traj", po.traj)->required();
    po_cmd->add_option("--frame", po.frame);
    po_cmd->add_option("--perturb-deg", po.perturb_deg);
    po_cmd->add_option("--perturb-frac", po.perturb_frac);
    po_cmd->add_option("--iters", po.iters);
    po_cmd->add_option("--seed", po.seed);

    RenderArgs ra;
    auto* render_cmd = app.add_subcommand("render", "render one frame to PPM or FIMG");
    render_cmd->add_option("--scene", ra.scene)->required();
    render_cmd->add_option("--traj", ra.traj)->required();
    render_cmd->add_option("--frame", ra.frame);
    render_cmd->add_option("--out", ra.out);
    render_cmd->add_option("--workers", ra.workers);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth_cmd->parsed()) return run_synth(synth);
        if (rec_cmd->parsed()) return run_reconstruct(rec);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (cb_cmd->parsed()) return run_cache_bench(cb);
        if (po_cmd->parsed()) return run_pose_opt(po);
        if (render_cmd->parsed()) return run_render(ra);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
