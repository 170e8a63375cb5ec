// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/geom.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ssplat {

namespace {

void check_rotation(const Mat3& r) {
    if (!r.finite()) throw std::invalid_argument("rotation has non-finite entries");
    if (orthonormality_error(r) > 1e-6) throw std::invalid_argument("rotation is not orthonormal");
    if (r.determinant() < 0.0) throw std::invalid_argument("rotation is a reflection");
}

}  // namespace

RigidPose::RigidPose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {
    check_rotation(r);
    if (!t.finite()) throw std::invalid_argument("translation has non-finite entries");
}

RigidPose compose(const RigidPose& a, const RigidPose& b) {
    Mat3 r = a.rotation * b.rotation;
    if (orthonormality_error(r) > 1e-8) r = orthonormalized(r);
    return RigidPose(r, a.rotation * b.translation + a.translation);
}

RigidPose invert(const RigidPose& p) {
    const Mat3 rt = p.rotation.transposed();
    return RigidPose(rt, -(rt * p.translation));
}

RigidPose relative(const RigidPose& i, const RigidPose& j) { return compose(invert(i), j); }

double rotation_angle(const Mat3& r) {
    // Geodesic angle acos((tr - 1)/2), evaluated as atan2(|skew|, cos) so the
    // identity maps to 0 at full precision instead of the ~1e-8 floor a raw
    // arccos of a clamped trace would leave.
    const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
    const Vec3 skew{(r.m[2][1] - r.m[1][2]) * 0.5, (r.m[0][2] - r.m[2][0]) * 0.5,
                    (r.m[1][0] - r.m[0][1]) * 0.5};
    return std::atan2(skew.norm(), c);
}

double translation_direction_angle(const Vec3& a, const Vec3& b) {
    const double na = a.norm(), nb = b.norm();
    if (na < 1e-9 || nb < 1e-9) return 0.0;
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

std::vector<int> farthest_point_sample(const std::vector<Vec3>& positions, int count) {
    const int n = static_cast<int>(positions.size());
    if (count < 1 || count > n) throw std::invalid_argument("farthest_point_sample: count out of range");

    std::vector<int> selected;
    selected.reserve(count);
    selected.push_back(0);

    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    int last = 0;
    while (static_cast<int>(selected.size()) < count) {
        int best = -1;
        double best_dist = -1.0;
        for (int i = 0; i < n; ++i) {
            const double d = (positions[i] - positions[last]).squared_norm();
            if (d < min_dist[i]) min_dist[i] = d;
            if (min_dist[i] > best_dist) {
                best_dist = min_dist[i];
                best = i;
            }
        }
        selected.push_back(best);
        last = best;
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

Intrinsics::Intrinsics(double fx_, double fy_, double cx_, double cy_, int width_, int height_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
    if (!(cx >= 0.0 && cx < width)) throw std::invalid_argument("intrinsics: cx out of image");
    if (!(cy >= 0.0 && cy < height)) throw std::invalid_argument("intrinsics: cy out of image");
}

std::string trajectory_to_text(const std::vector<TrajectoryRecord>& records) {
    std::ostringstream out;
    for (const auto& rec : records) {
        nlohmann::json j;
        j["frame"] = rec.frame;
        auto& rot = j["rotation"] = nlohmann::json::array();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rot.push_back(rec.pose.rotation.m[r][c]);
        j["translation"] = {rec.pose.translation.x, rec.pose.translation.y, rec.pose.translation.z};
        if (rec.intrinsics) {
            const Intrinsics& k = *rec.intrinsics;
            j["intrinsics"] = {{"fx", k.fx},       {"fy", k.fy},        {"cx", k.cx},
                               {"cy", k.cy},       {"width", k.width},  {"height", k.height}};
        }
        out << j.dump() << '\n';
    }
    return out.str();
}

std::vector<TrajectoryRecord> trajectory_from_text(const std::string& text) {
    std::vector<TrajectoryRecord> records;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        TrajectoryRecord rec;
        rec.frame = j.at("frame").get<int>();
        Mat3 rot;
        const auto& r = j.at("rotation");
        if (r.size() != 9) throw std::runtime_error("trajectory: rotation must have 9 entries");
        for (int i = 0; i < 9; ++i) rot.m[i / 3][i % 3] = r[i].get<double>();
        const auto& t = j.at("translation");
        rec.pose = RigidPose(rot, {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
        if (j.contains("intrinsics")) {
            const auto& k = j["intrinsics"];
            rec.intrinsics = Intrinsics(k.at("fx").get<double>(), k.at("fy").get<double>(),
                                        k.at("cx").get<double>(), k.at("cy").get<double>(),
                                        k.at("width").get<int>(), k.at("height").get<int>());
        }
        records.push_back(rec);
    }
    return records;
}

void save_trajectory(const std::string& path, const std::vector<TrajectoryRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << trajectory_to_text(records);
}

std::vector<TrajectoryRecord> load_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return trajectory_from_text(buf.str());
}

}  // namespace ssplat
