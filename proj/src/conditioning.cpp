// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssplat/rng.hpp"

namespace ssplat {

namespace {

PatchifyWeights::Stage seeded_stage(Rng rng, int in_ch, int out_ch) {
    PatchifyWeights::Stage s;
    s.in_ch = in_ch;
    s.out_ch = out_ch;
    s.w.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
    s.b.resize(out_ch);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * 9.0);
    for (auto& v : s.w) v = rng.uniform(-bound, bound);
    for (auto& v : s.b) v = rng.uniform(-bound, bound);
    return s;
}

// Stride-2 kernel-3 convolution with padding 1 by edge replication; the
// planar layout matches FeatureImage.
void conv_stage(const PatchifyWeights::Stage& s, const std::vector<double>& in, int in_w, int in_h,
                std::vector<double>& out, int& out_w, int& out_h, bool relu) {
    out_w = (in_w + 1) / 2;
    out_h = (in_h + 1) / 2;
    out.assign(static_cast<std::size_t>(s.out_ch) * out_w * out_h, 0.0);

#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < s.out_ch; ++oc) {
        const double* wbase = s.w.data() + static_cast<std::size_t>(oc) * s.in_ch * 9;
        double* oplane = out.data() + static_cast<std::size_t>(oc) * out_h * out_w;
        for (int oy = 0; oy < out_h; ++oy)
            for (int ox = 0; ox < out_w; ++ox) {
                double acc = s.b[oc];
                for (int ic = 0; ic < s.in_ch; ++ic) {
                    const double* iplane = in.data() + static_cast<std::size_t>(ic) * in_h * in_w;
                    const double* wk = wbase + static_cast<std::size_t>(ic) * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = std::clamp(oy * 2 + ky - 1, 0, in_h - 1);
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = std::clamp(ox * 2 + kx - 1, 0, in_w - 1);
                            acc += wk[ky * 3 + kx] * iplane[static_cast<std::size_t>(iy) * in_w + ix];
                        }
                    }
                }
                if (relu && acc < 0.0) acc = 0.0;
                oplane[static_cast<std::size_t>(oy) * out_w + ox] = acc;
            }
    }
}

}  // namespace

PatchifyWeights PatchifyWeights::seeded(uint64_t seed, int d_cond) {
    PatchifyWeights w;
    w.d_cond = d_cond;
    Rng rng(seed);
    w.stages[0] = seeded_stage(rng.fork(1), 15, 32);
    w.stages[1] = seeded_stage(rng.fork(2), 32, 64);
    w.stages[2] = seeded_stage(rng.fork(3), 64, d_cond);
    return w;
}

ConditioningTokens patchify(const FeatureImage& img, const PatchifyWeights& weights) {
    if (img.channels() != 15) throw std::invalid_argument("patchify: expected a 15-channel image");

    std::vector<double> buf = img.data();
    int w = img.width(), h = img.height();
    for (int stage = 0; stage < 3; ++stage) {
        std::vector<double> next;
        int nw = 0, nh = 0;
        conv_stage(weights.stages[stage], buf, w, h, next, nw, nh, stage < 2);
        buf.swap(next);
        w = nw;
        h = nh;
    }

    ConditioningTokens tokens;
    tokens.grid_h = h;
    tokens.grid_w = w;
    tokens.dim = weights.d_cond;
    tokens.data.resize(static_cast<std::size_t>(h) * w * weights.d_cond);
    // planar -> token-major
    for (int c = 0; c < weights.d_cond; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                tokens.data[(static_cast<std::size_t>(y) * w + x) * weights.d_cond + c] =
                    buf[(static_cast<std::size_t>(c) * h + y) * w + x];
    return tokens;
}

ConditioningTokens build_conditioning(const WorldScene& scene, const FeatureImage& observation,
                                      const RigidPose& assembly_pose,
                                      const std::optional<Intrinsics>& k_gt, const Intrinsics& k_pred,
                                      const PatchifyWeights& weights, const RenderConfig& cfg) {
    if (observation.channels() != 3)
        throw std::invalid_argument("build_conditioning: observation must be RGB");

    // Ground-truth intrinsics take precedence; the predicted ones are used
    // only when none are provided, so no information leaks in the posed case.
    Intrinsics k = k_gt ? *k_gt : k_pred;
    if (k.width != observation.width() || k.height != observation.height())
        throw std::invalid_argument("build_conditioning: image size mismatch");

    const FeatureImage rendered = render(scene, assembly_pose, k, cfg);

    FeatureImage stacked(k.width, k.height, 15);
    const std::size_t plane = static_cast<std::size_t>(k.width) * k.height;
    std::copy_n(observation.data().begin(), plane * 3, stacked.data().begin());
    std::copy_n(rendered.data().begin(), plane * 12, stacked.data().begin() + plane * 3);
    return patchify(stacked, weights);
}

}  // namespace ssplat
