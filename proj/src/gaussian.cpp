// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/gaussian.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ssplat {

void GaussianPrimitive::validate() const {
    if (!mean.finite()) throw std::invalid_argument("gaussian: non-finite mean");
    if (!orientation.finite() || std::fabs(orientation.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("gaussian: orientation is not a unit quaternion");
    for (int i = 0; i < 3; ++i)
        if (!(scale[i] > 1e-8 && scale[i] < 1e6))
            throw std::invalid_argument("gaussian: scale out of (1e-8, 1e6)");
    if (!(opacity >= 0.0 && opacity <= 1.0)) throw std::invalid_argument("gaussian: opacity out of [0, 1]");
    if (!color.finite()) throw std::invalid_argument("gaussian: non-finite color");
    for (double f : feature)
        if (!std::isfinite(f)) throw std::invalid_argument("gaussian: non-finite feature");
}

void AssemblyConfig::validate() const {
    if (!(prune_threshold >= 0.0 && prune_threshold < 1.0))
        throw std::invalid_argument("assembly: prune_threshold out of [0, 1)");
}

GaussianPrimitive transform_local(const GaussianPrimitive& g, const RigidPose& a) {
    GaussianPrimitive out = g;
    out.mean = a.apply(g.mean);
    out.orientation = (quat_from_matrix(a.rotation) * g.orientation).normalized();
    return out;
}

namespace {

double max_pairwise_distance(const std::vector<Vec3>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::max(best, (pts[i] - pts[j]).norm());
    return best;
}

std::vector<Vec3> translation_points(const std::vector<RigidPose>& poses, bool centers) {
    std::vector<Vec3> pts;
    pts.reserve(poses.size());
    for (const auto& p : poses) pts.push_back(centers ? -(p.rotation.transposed() * p.translation) : p.translation);
    return pts;
}

}  // namespace

double scale_factor(const std::vector<RigidPose>& gt_first_chunk,
                    const std::vector<RigidPose>& pred_first_chunk, AlignmentMode mode,
                    bool use_camera_centers) {
    if (gt_first_chunk.size() != pred_first_chunk.size())
        throw std::invalid_argument("scale_factor: pose set length mismatch");
    if (gt_first_chunk.empty()) throw std::invalid_argument("scale_factor: empty pose sets");

    const double gt_scale = max_pairwise_distance(translation_points(gt_first_chunk, use_camera_centers));
    const double pred_scale = max_pairwise_distance(translation_points(pred_first_chunk, use_camera_centers));
    if (gt_scale < 1e-9 || pred_scale < 1e-9) return 1.0;
    return mode == AlignmentMode::predicted_scale_consistent ? pred_scale / gt_scale
                                                             : gt_scale / pred_scale;
}

void assemble(WorldScene& scene, const std::vector<std::vector<GaussianPrimitive>>& locals,
              const std::vector<RigidPose>& poses, double factor, int32_t chunk) {
    if (locals.size() != poses.size()) throw std::invalid_argument("assemble: one pose per view required");
    if (!(factor > 0.0)) throw std::invalid_argument("assemble: factor must be positive");
    for (std::size_t v = 0; v < locals.size(); ++v) {
        const RigidPose scaled(poses[v].rotation, poses[v].translation * factor);
        for (const auto& g : locals[v]) scene.append(transform_local(g, scaled), chunk);
    }
}

WorldScene prune(const WorldScene& scene, double threshold) {
    if (!(threshold >= 0.0 && threshold < 1.0)) throw std::invalid_argument("prune: threshold out of [0, 1)");
    WorldScene out;
    for (std::size_t i = 0; i < scene.primitives.size(); ++i)
        if (scene.primitives[i].opacity >= threshold)
            out.append(scene.primitives[i], scene.chunk_stamp[i]);
    return out;
}

std::string scene_to_text(const WorldScene& scene) {
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu 1\n", scene.primitives.size());
    out += buf;
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof(buf), "%.17g%c", v, sep);
        out += buf;
    };
    for (const auto& g : scene.primitives) {
        put(g.mean.x, ' ');
        put(g.mean.y, ' ');
        put(g.mean.z, ' ');
        put(g.orientation.w, ' ');
        put(g.orientation.x, ' ');
        put(g.orientation.y, ' ');
        put(g.orientation.z, ' ');
        put(g.scale.x, ' ');
        put(g.scale.y, ' ');
        put(g.scale.z, ' ');
        put(g.opacity, ' ');
        put(g.color.x, ' ');
        put(g.color.y, ' ');
        put(g.color.z, ' ');
        for (int i = 0; i < 9; ++i) put(g.feature[i], i == 8 ? '\n' : ' ');
    }
    return out;
}

WorldScene scene_from_text(const std::string& text) {
    std::istringstream in(text);
    std::size_t count = 0;
    int version = 0;
    if (!(in >> count >> version)) throw std::runtime_error("scene: bad header");
    if (version != 1) throw std::runtime_error("scene: unsupported format version");
    WorldScene scene;
    scene.primitives.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        GaussianPrimitive g;
        in >> g.mean.x >> g.mean.y >> g.mean.z;
        in >> g.orientation.w >> g.orientation.x >> g.orientation.y >> g.orientation.z;
        in >> g.scale.x >> g.scale.y >> g.scale.z;
        in >> g.opacity;
        in >> g.color.x >> g.color.y >> g.color.z;
        for (int k = 0; k < 9; ++k) in >> g.feature[k];
        if (!in) throw std::runtime_error("scene: truncated file");
        scene.append(g, 0);
    }
    return scene;
}

void save_scene(const std::string& path, const WorldScene& scene) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << scene_to_text(scene);
}

WorldScene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scene_from_text(buf.str());
}

}  // namespace ssplat
