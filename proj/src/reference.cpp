// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace ssplat {

FeatureImage reference_render(const WorldScene& scene, const RigidPose& camera, const Intrinsics& k,
                              const RenderConfig& cfg) {
    cfg.validate();
    if (k.width < 1 || k.height < 1) throw std::invalid_argument("render: zero-sized image");

    using render_detail::FlatSplat;
    const std::vector<FlatSplat> flats = render_detail::prepare_splats(scene, camera, k, cfg);
    const double cutoff_sq = cfg.sigma_cutoff * cfg.sigma_cutoff;

    FeatureImage img(k.width, k.height, 12);
    for (int y = 0; y < k.height; ++y) {
        const double py = y + 0.5;
        for (int x = 0; x < k.width; ++x) {
            const double px = x + 0.5;
            double acc[12] = {0};
            double transmittance = 1.0;
            for (const FlatSplat& f : flats) {
                if (transmittance < cfg.transmittance_floor) break;
                render_detail::composite_step(f, px, py, cutoff_sq, cfg.alpha_epsilon, acc,
                                              transmittance);
            }
            for (int c = 0; c < 12; ++c) {
                double v = acc[c] + transmittance * cfg.background[c];
                if (c < 3) v = std::clamp(v, 0.0, 1.0);
                img.at(c, y, x) = v;
            }
        }
    }
    return img;
}

ReferenceDecoder::ReferenceDecoder(const StreamModel& model)
    : model_(model), history_(model.profile().layer_pairs) {}

std::vector<Matrix> ReferenceDecoder::decode_chunk(const EncodedChunk& chunk) {
    const ModelProfile& profile = model_.profile();
    const int views = static_cast<int>(chunk.view_tokens.size());
    if (views < 1 || views > 8) throw std::invalid_argument("reference decode: chunk exceeds 8 views");

    const int d = profile.d_model;
    const int tpv = chunk.view_tokens[0].rows;
    std::vector<Matrix> x = chunk.view_tokens;

    for (int pair = 0; pair < profile.layer_pairs; ++pair) {
        for (int v = 0; v < views; ++v)
            model_detail::block_forward(x[v], x[v], model_.decoder_layers()[pair].frame, profile.heads,
                                        false);

        Matrix current(views * tpv, d);
        for (int v = 0; v < views; ++v)
            std::copy_n(x[v].a.begin(), x[v].a.size(),
                        current.a.begin() + static_cast<std::size_t>(v) * tpv * d);
        history_[pair].push_back(current);

        int ctx_rows = 0;
        for (const auto& block : history_[pair]) ctx_rows += block.rows;
        Matrix ctx(ctx_rows, d);
        std::size_t at = 0;
        for (const auto& block : history_[pair]) {
            std::copy_n(block.a.begin(), block.a.size(), ctx.a.begin() + at);
            at += block.a.size();
        }
        model_detail::block_forward(current, ctx, model_.decoder_layers()[pair].global, profile.heads,
                                    true);

        for (int v = 0; v < views; ++v)
            std::copy_n(current.a.begin() + static_cast<std::size_t>(v) * tpv * d, x[v].a.size(),
                        x[v].a.begin());
    }
    return x;
}

}  // namespace ssplat
