// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/stream.hpp"

#include <chrono>
#include <optional>
#include <stdexcept>

#include "ssplat/conditioning.hpp"
#include "ssplat/render.hpp"

namespace ssplat {

namespace {

std::vector<std::pair<int, int>> chunk_ranges(int frames, int chunk_size) {
    std::vector<std::pair<int, int>> ranges;
    ranges.emplace_back(0, 8);
    int at = 8;
    while (at < frames) {
        const int n = std::min(chunk_size, frames - at);
        ranges.emplace_back(at, n);
        at += n;
    }
    return ranges;
}

struct ChunkPrediction {
    std::vector<std::vector<GaussianPrimitive>> locals;
    std::vector<RigidPose> poses;
    std::vector<FocalPair> focals;
};

}  // namespace

StreamResult stream_reconstruct(const SyntheticScene& input, const PredictorKind& predictor,
                                const AssemblyConfig& assembly, const StreamOptions& options) {
    const int frames = input.frame_count();
    if (frames < 8) throw std::invalid_argument("stream_reconstruct: first chunk needs 8 frames");
    if (options.chunk_size < 1 || options.chunk_size > 8)
        throw std::invalid_argument("stream_reconstruct: chunk size out of [1, 8]");
    assembly.validate();

    const bool toy = std::holds_alternative<ModelProfile>(predictor);
    const ModelProfile profile =
        toy ? std::get<ModelProfile>(predictor) : ModelProfile::toy(options.seed);
    const int cached_layers = options.compress ? profile.cached_global_layers : profile.layer_pairs;

    std::optional<StreamModel> model;
    std::optional<CompressedKvCache> cache;
    std::optional<PatchifyWeights> patchify_weights;
    std::optional<OraclePredictor> oracle;
    if (toy) {
        model.emplace(profile);
        cache.emplace(profile, options.compress ? CachePolicy::compressed : CachePolicy::retain_all);
        patchify_weights = PatchifyWeights::seeded(profile.seed, profile.d_cond);
    } else {
        oracle.emplace(input, std::get<OracleNoise>(predictor));
    }

    StreamResult result;
    result.predicted_poses.reserve(frames);
    result.predicted_focals.reserve(frames);

    int retained_bookkeeping = 0;  // oracle mode: (chunk, view) retention schedule
    double factor = 1.0;
    bool factor_frozen = false;

    const auto ranges = chunk_ranges(frames, options.chunk_size);
    for (std::size_t ci = 0; ci < ranges.size(); ++ci) {
        const auto [first, count] = ranges[ci];
        const auto t0 = std::chrono::steady_clock::now();

        ChunkPrediction pred;
        pred.locals.resize(count);
        pred.poses.resize(count);
        pred.focals.resize(count);

        if (toy) {
            std::vector<FeatureImage> images;
            images.reserve(count);
            for (int v = 0; v < count; ++v)
                images.push_back(render_rgb(input.world, input.poses[first + v],
                                            input.intrinsics[first + v], options.render));
            const EncodedChunk encoded = model->encode_chunk(images);
            const std::vector<Matrix> features = model->decode_chunk(encoded, *cache);
            pred.poses = model->predict_poses(features);

            if (!factor_frozen && assembly.pose_source == PoseSource::ground_truth) {
                std::vector<RigidPose> gt_first(input.poses.begin(), input.poses.begin() + count);
                factor = scale_factor(gt_first, pred.poses, assembly.alignment_mode,
                                      assembly.scale_from_camera_centers);
            }
            factor_frozen = true;

            // Render-and-Compare conditioning at the actual assembly pose.
            std::vector<ConditioningTokens> conditioning(count);
            std::vector<Intrinsics> used_k(count);
            for (int v = 0; v < count; ++v) {
                const RigidPose assembly_pose =
                    assembly.pose_source == PoseSource::ground_truth
                        ? RigidPose(input.poses[first + v].rotation,
                                    input.poses[first + v].translation * factor)
                        : pred.poses[v];
                const std::optional<Intrinsics> k_gt =
                    options.use_gt_intrinsics ? std::optional<Intrinsics>(input.intrinsics[first + v])
                                              : std::nullopt;
                conditioning[v] = build_conditioning(result.scene, images[v], assembly_pose, k_gt,
                                                     encoded.pred_intrinsics[v], *patchify_weights,
                                                     options.render);
                conditioning[v].view_index = first + v;
                used_k[v] = k_gt ? *k_gt : encoded.pred_intrinsics[v];
            }
            HeadsOutput heads = model->run_heads(encoded, features, conditioning, used_k);
            pred.locals = std::move(heads.gaussians);
            for (int v = 0; v < count; ++v)
                pred.focals[v] = {encoded.pred_intrinsics[v].fx, encoded.pred_intrinsics[v].fy};
        } else {
            for (int v = 0; v < count; ++v) {
                OraclePrediction p = oracle->predict(first + v);
                pred.locals[v] = std::move(p.locals);
                pred.poses[v] = p.pose;
                pred.focals[v] = {p.intrinsics.fx, p.intrinsics.fy};
            }
            if (!factor_frozen && assembly.pose_source == PoseSource::ground_truth) {
                std::vector<RigidPose> gt_first(input.poses.begin(), input.poses.begin() + count);
                factor = scale_factor(gt_first, pred.poses, assembly.alignment_mode,
                                      assembly.scale_from_camera_centers);
            }
            factor_frozen = true;
            retained_bookkeeping += (ci == 0 || !options.compress) ? count : 1;
        }

        std::vector<RigidPose> assembly_poses(count);
        for (int v = 0; v < count; ++v)
            assembly_poses[v] = assembly.pose_source == PoseSource::ground_truth
                                    ? input.poses[first + v]
                                    : pred.poses[v];
        const double assemble_factor = assembly.pose_source == PoseSource::ground_truth ? factor : 1.0;
        assemble(result.scene, pred.locals, assembly_poses, assemble_factor, static_cast<int>(ci));
        result.scene = prune(result.scene, assembly.prune_threshold);

        for (int v = 0; v < count; ++v) {
            result.predicted_poses.push_back(pred.poses[v]);
            result.predicted_focals.push_back(pred.focals[v]);
        }

        const auto t1 = std::chrono::steady_clock::now();
        ChunkLog log;
        log.chunk_index = static_cast<int>(ci);
        log.first_frame = first;
        log.frame_count = count;
        log.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
        log.cached_token_sets = toy ? cache->token_set_count() : cached_layers * retained_bookkeeping;
        log.expected_token_sets =
            options.compress
                ? token_set_count(first + count, options.chunk_size, cached_layers)
                : static_cast<int>(baseline_token_set_count(first + count, profile.layer_pairs));
        log.cache_bytes = toy ? cache->byte_size() : 0;
        log.scene_size = result.scene.size();
        result.chunks.push_back(log);
    }

    result.scale_factor = factor;
    if (!result.chunks.empty()) {
        const ChunkLog& last = result.chunks.back();
        result.memory.token_sets = last.cached_token_sets;
        result.memory.baseline = baseline_token_set_count(frames, profile.layer_pairs);
        result.memory.reduction_pct =
            100.0 * (1.0 - static_cast<double>(last.cached_token_sets) /
                               static_cast<double>(result.memory.baseline));
        result.memory.cache_bytes = last.cache_bytes;
    }
    return result;
}

}  // namespace ssplat
