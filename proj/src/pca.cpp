// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ssplat/render.hpp"
#include "ssplat/rng.hpp"

namespace ssplat {

namespace {

constexpr int kFeatureChannels = 9;
constexpr uint64_t kPowerIterationSeed = 0x5eedFACEu;
constexpr int kPowerIterations = 100;

using FeatVec = std::array<double, kFeatureChannels>;

FeatVec multiply(const double cov[kFeatureChannels][kFeatureChannels], const FeatVec& v) {
    FeatVec out{};
    for (int i = 0; i < kFeatureChannels; ++i) {
        double s = 0.0;
        for (int j = 0; j < kFeatureChannels; ++j) s += cov[i][j] * v[j];
        out[i] = s;
    }
    return out;
}

double norm(const FeatVec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

FeatureImage pca_visualize(const FeatureImage& img) { return pca_project(img).image; }

PcaProjection pca_project(const FeatureImage& img) {
    if (img.channels() != 12) throw std::invalid_argument("pca_visualize: expected a 12-channel image");
    const int w = img.width(), h = img.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (n < 3) throw std::invalid_argument("pca_visualize: image needs at least 3 pixels");

    FeatVec mean{};
    for (int c = 0; c < kFeatureChannels; ++c) {
        double s = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) s += img.at(3 + c, y, x);
        mean[c] = s / static_cast<double>(n);
    }

    double cov[kFeatureChannels][kFeatureChannels] = {};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            FeatVec d;
            for (int c = 0; c < kFeatureChannels; ++c) d[c] = img.at(3 + c, y, x) - mean[c];
            for (int i = 0; i < kFeatureChannels; ++i)
                for (int j = 0; j < kFeatureChannels; ++j) cov[i][j] += d[i] * d[j];
        }
    double total_var = 0.0;
    for (int i = 0; i < kFeatureChannels; ++i) {
        for (int j = 0; j < kFeatureChannels; ++j) cov[i][j] /= static_cast<double>(n);
        total_var += cov[i][i];
    }

    PcaProjection result;
    result.image = FeatureImage(w, h, 3);
    FeatureImage& out = result.image;
    if (total_var < 1e-24) {  // constant features: degenerate rule
        std::fill(out.data().begin(), out.data().end(), 0.5);
        return result;
    }

    Rng rng(kPowerIterationSeed);
    std::array<FeatVec, 3>& components = result.components;
    for (int comp = 0; comp < 3; ++comp) {
        FeatVec v;
        for (int i = 0; i < kFeatureChannels; ++i) v[i] = rng.uniform(-1.0, 1.0);
        double vn = norm(v);
        for (int i = 0; i < kFeatureChannels; ++i) v[i] /= vn;
        for (int it = 0; it < kPowerIterations; ++it) {
            FeatVec next = multiply(cov, v);
            const double nn = norm(next);
            if (nn < 1e-300) break;  // deflated to (numerical) zero
            for (int i = 0; i < kFeatureChannels; ++i) next[i] /= nn;
            v = next;
        }
        // Rayleigh quotient, then deflate.
        const FeatVec cv = multiply(cov, v);
        double lambda = 0.0;
        for (int i = 0; i < kFeatureChannels; ++i) lambda += v[i] * cv[i];
        for (int i = 0; i < kFeatureChannels; ++i)
            for (int j = 0; j < kFeatureChannels; ++j) cov[i][j] -= lambda * v[i] * v[j];
        // Sign convention: largest-magnitude loading made positive.
        int arg = 0;
        for (int i = 1; i < kFeatureChannels; ++i)
            if (std::fabs(v[i]) > std::fabs(v[arg])) arg = i;
        if (v[arg] < 0.0)
            for (int i = 0; i < kFeatureChannels; ++i) v[i] = -v[i];
        components[comp] = v;
        result.eigenvalues[comp] = lambda;
    }

    for (int comp = 0; comp < 3; ++comp) {
        double lo = 0.0, hi = 0.0;
        bool first = true;
        std::vector<double> proj(n);
        std::size_t at = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x, ++at) {
                double s = 0.0;
                for (int c = 0; c < kFeatureChannels; ++c)
                    s += components[comp][c] * (img.at(3 + c, y, x) - mean[c]);
                proj[at] = s;
                lo = first ? s : std::min(lo, s);
                hi = first ? s : std::max(hi, s);
                first = false;
            }
        const double span = hi - lo;
        at = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x, ++at)
                out.at(comp, y, x) = span < 1e-12 ? 0.5 : (proj[at] - lo) / span;
    }
    return result;
}

}  // namespace ssplat
