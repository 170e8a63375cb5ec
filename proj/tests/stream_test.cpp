// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>

#include <algorithm>

#include "dense_oracle.hpp"
#include "ssplat/curriculum.hpp"
#include "ssplat/reference.hpp"
#include "test_util.hpp"

using namespace ssplat;
using namespace ssplat::testutil;

TEST_SUITE_BEGIN("stream");

namespace {

std::vector<FeatureImage> random_images(uint64_t seed, int count, int side = 16) {
    Rng rng(seed);
    std::vector<FeatureImage> images;
    for (int i = 0; i < count; ++i) {
        FeatureImage img(side, side, 3);
        for (auto& v : img.data()) v = rng.uniform();
        images.push_back(std::move(img));
    }
    return images;
}

std::vector<std::vector<FeatureImage>> chunked(const std::vector<FeatureImage>& frames, int n) {
    std::vector<std::vector<FeatureImage>> chunks;
    std::size_t at = 0;
    while (at < frames.size()) {
        const std::size_t count = at == 0 ? 8 : std::min<std::size_t>(n, frames.size() - at);
        chunks.emplace_back(frames.begin() + at, frames.begin() + at + count);
        at += count;
    }
    return chunks;
}

bool features_equal(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].a != b[i].a) return false;
    return true;
}

ModelProfile mini_profile(uint64_t seed) {
    ModelProfile p;
    p.d_model = 16;
    p.heads = 2;
    p.layer_pairs = 2;
    p.cached_global_layers = 1;
    p.mlp_hidden = 32;
    p.d_cond = 16;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("token set accounting") {
    CHECK(token_set_count(256, 8, 8) == 312);
    CHECK(baseline_token_set_count(256, 18) == 4608);
    for (int n = 1; n <= 8; ++n) CHECK(token_set_count(8, n, 8) == 64);
    CHECK(token_set_count(100, 8, 8) == 160);
    CHECK(baseline_token_set_count(100, 18) == 1800);
    CHECK(1.0 - 160.0 / 1800.0 > 0.90);
    CHECK(token_set_count(17, 4, 3) == 3 * (8 + 3));  // ragged final chunk rounds up

    CHECK_THROWS_AS(token_set_count(7, 8, 8), std::invalid_argument);
    CHECK_THROWS_AS(token_set_count(64, 0, 8), std::invalid_argument);
    CHECK_THROWS_AS(token_set_count(64, 9, 8), std::invalid_argument);
}

TEST_CASE("cached token count grows affinely in the stream length") {
    const int lc = 3, n = 8;
    const int c64 = token_set_count(64, n, lc);
    const int c128 = token_set_count(128, n, lc);
    const int c256 = token_set_count(256, n, lc);
    CHECK(c128 - c64 == lc * (128 - 64) / n);
    CHECK(c256 - c128 == lc * (256 - 128) / n);
}

TEST_CASE("encoder token layout") {
    const StreamModel model(ModelProfile::toy(3));
    std::vector<FeatureImage> one;
    one.emplace_back(224, 224, 3);
    const EncodedChunk chunk = model.encode_chunk(one);
    CHECK(chunk.grid_w == 14);
    CHECK(chunk.grid_h == 14);
    CHECK(chunk.view_tokens[0].rows == 197);  // 196 patch tokens + 1 camera token

    const auto images = random_images(4, 2);
    std::vector<FeatureImage> twice{images[0], images[0]};
    const EncodedChunk same = model.encode_chunk(twice);
    CHECK(same.view_tokens[0].a == same.view_tokens[1].a);

    CHECK_THROWS_AS(model.encode_chunk(std::vector<FeatureImage>{}), std::invalid_argument);
    CHECK_THROWS_AS(model.encode_chunk(random_images(5, 9)), std::invalid_argument);
    std::vector<FeatureImage> ragged;
    ragged.emplace_back(17, 16, 3);
    CHECK_THROWS_AS(model.encode_chunk(ragged), std::invalid_argument);
}

TEST_CASE("predicted focal lengths are positive for many seeds") {
    std::vector<FeatureImage> one;
    one.emplace_back(16, 16, 3);
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        const StreamModel model(mini_profile(seed));
        const EncodedChunk chunk = model.encode_chunk(one);
        CHECK(chunk.pred_intrinsics[0].fx > 0.0);
        CHECK(chunk.pred_intrinsics[0].fy > 0.0);
    }
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const StreamModel model(ModelProfile::toy(seed));
        const EncodedChunk chunk = model.encode_chunk(one);
        CHECK(chunk.pred_intrinsics[0].fx > 0.0);
        CHECK(chunk.pred_intrinsics[0].fy > 0.0);
    }
    // 1000 random images through one model.
    const StreamModel model(mini_profile(99));
    for (int batch = 0; batch < 125; ++batch) {
        const EncodedChunk chunk = model.encode_chunk(random_images(5000 + batch, 8));
        for (const auto& k : chunk.pred_intrinsics) {
            CHECK(k.fx > 0.0);
            CHECK(k.fy > 0.0);
        }
    }
}

TEST_CASE("compressed decode matches the masked dense-attention oracle") {
    for (uint64_t seed : {0ull, 1ull}) {
        const StreamModel model(ModelProfile::toy(seed));
        for (int n : {4, 8}) {
            for (int frames : {8, 17, 40}) {
                CompressedKvCache cache(model.profile(), CachePolicy::compressed);
                testoracle::MaskedDenseDecoder oracle(model);
                for (const auto& images : chunked(random_images(seed * 97 + frames, frames), n)) {
                    const EncodedChunk chunk = model.encode_chunk(images);
                    const auto got = model.decode_chunk(chunk, cache);
                    const auto expected = oracle.decode_chunk(chunk.view_tokens);
                    CHECK(testoracle::relative_error(got, expected) < 1e-5);
                }
                CHECK(cache.token_set_count() ==
                      token_set_count(frames, n, model.profile().cached_global_layers));
            }
        }
    }
}

TEST_CASE("retain-all with no truncation reproduces the reference decoder bitwise") {
    const StreamModel model(ModelProfile::toy(5));
    CompressedKvCache cache(model.profile(), CachePolicy::retain_all);
    ReferenceDecoder reference(model);
    for (const auto& images : chunked(random_images(55, 24), 8)) {
        const EncodedChunk chunk = model.encode_chunk(images);
        const auto got = model.decode_chunk(chunk, cache);
        const auto expected = reference.decode_chunk(chunk);
        CHECK(features_equal(got, expected));
    }
    CHECK(cache.token_set_count() ==
          baseline_token_set_count(24, model.profile().layer_pairs));
}

TEST_CASE("cache accounting holds at every chunk boundary") {
    const StreamModel model(ModelProfile::toy(6));
    for (int n : {4, 5, 7}) {
        CompressedKvCache cache(model.profile(), CachePolicy::compressed);
        int seen = 0;
        for (const auto& images : chunked(random_images(60 + n, 30), n)) {
            model.decode_chunk(model.encode_chunk(images), cache);
            seen += static_cast<int>(images.size());
            CHECK(cache.token_set_count() ==
                  token_set_count(seen, n, model.profile().cached_global_layers));
        }
    }
}

TEST_CASE("outputs for a chunk are causal") {
    const StreamModel model(ModelProfile::toy(7));
    const auto frames = random_images(70, 16);
    auto run = [&](const std::vector<FeatureImage>& tail) {
        CompressedKvCache cache(model.profile(), CachePolicy::compressed);
        std::vector<std::vector<Matrix>> outputs;
        for (const auto& images : chunked(frames, 4)) outputs.push_back(model.decode_chunk(model.encode_chunk(images), cache));
        outputs.push_back(model.decode_chunk(model.encode_chunk(tail), cache));
        return outputs;
    };
    const auto a = run(random_images(71, 4));
    const auto b = run(random_images(72, 4));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i + 1 < a.size(); ++i) CHECK(features_equal(a[i], b[i]));
    CHECK_FALSE(features_equal(a.back(), b.back()));
}

TEST_CASE("register marking changes multi-chunk runs only") {
    const auto frames = random_images(80, 12);
    auto run = [&](bool zero_register) {
        StreamModel model(ModelProfile::toy(8));
        if (zero_register) std::fill(model.register_embedding().begin(), model.register_embedding().end(), 0.0);
        CompressedKvCache cache(model.profile(), CachePolicy::compressed);
        std::vector<std::vector<Matrix>> outputs;
        for (const auto& images : chunked(frames, 4))
            outputs.push_back(model.decode_chunk(model.encode_chunk(images), cache));
        return outputs;
    };
    const auto with = run(false), without = run(true);
    CHECK(features_equal(with[0], without[0]));  // single-chunk output untouched
    bool any_difference = false;
    for (std::size_t i = 1; i < with.size(); ++i)
        if (!features_equal(with[i], without[i])) any_difference = true;
    CHECK(any_difference);
}

TEST_CASE("decode argument errors") {
    const StreamModel model(ModelProfile::toy(9));
    CompressedKvCache cache(model.profile(), CachePolicy::compressed);
    // First chunk must have 8 views.
    CHECK_THROWS_AS(model.decode_chunk(model.encode_chunk(random_images(90, 4)), cache),
                    std::invalid_argument);
    // Cache sized for a different profile.
    CompressedKvCache wrong(ModelProfile::paper_fidelity(9), CachePolicy::compressed);
    CHECK_THROWS_AS(model.decode_chunk(model.encode_chunk(random_images(90, 8)), wrong),
                    std::invalid_argument);
}

TEST_CASE("gaussian and pose heads honor their activation guarantees") {
    std::vector<FeatureImage> one;
    one.emplace_back(16, 16, 3);
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        const StreamModel model(mini_profile(seed));
        const EncodedChunk chunk = model.encode_chunk(one);
        ConditioningTokens z;
        z.grid_h = 2;
        z.grid_w = 2;
        z.dim = model.profile().d_cond;
        Rng zrng(seed ^ 0xABCDu);
        z.data.resize(static_cast<std::size_t>(4) * z.dim);
        for (auto& v : z.data) v = zrng.normal();

        const Intrinsics k(16.0, 16.0, 8.0, 8.0, 16, 16);
        const HeadsOutput out = model.run_heads(chunk, chunk.view_tokens, {z}, {k});
        REQUIRE(out.gaussians.size() == 1);
        REQUIRE(out.poses.size() == 1);
        for (const auto& g : out.gaussians[0]) {
            CHECK(g.opacity >= 0.0);
            CHECK(g.opacity <= 1.0);
            CHECK(g.scale.x > 0.0);
            CHECK(g.scale.y > 0.0);
            CHECK(g.scale.z > 0.0);
            CHECK(std::fabs(g.orientation.norm() - 1.0) < 1e-6);
            CHECK(g.mean.z > 0.0);
        }
        CHECK(orthonormality_error(out.poses[0].rotation) <= 1e-6);
    }
}

TEST_CASE("gaussian heads read the conditioning tokens") {
    const StreamModel model(ModelProfile::toy(10));
    const auto images = random_images(100, 2, 32);
    std::vector<FeatureImage> chunk_images{images[0], images[1]};
    const EncodedChunk chunk = model.encode_chunk(chunk_images);

    auto make_z = [&](uint64_t s) {
        ConditioningTokens z;
        z.grid_h = 4;
        z.grid_w = 4;
        z.dim = model.profile().d_cond;
        Rng rng(s);
        z.data.resize(static_cast<std::size_t>(16) * z.dim);
        for (auto& v : z.data) v = rng.normal();
        return z;
    };
    const ConditioningTokens za = make_z(1), zb = make_z(2);
    const Intrinsics k(36.0, 36.0, 16.0, 16.0, 32, 32);

    const HeadsOutput ab = model.run_heads(chunk, chunk.view_tokens, {za, zb}, {k, k});
    const HeadsOutput ba = model.run_heads(chunk, chunk.view_tokens, {zb, za}, {k, k});
    double diff = 0.0;
    for (std::size_t i = 0; i < ab.gaussians[0].size(); ++i)
        diff = std::max(diff, (ab.gaussians[0][i].mean - ba.gaussians[0][i].mean).norm());
    CHECK(diff > 0.0);
    // The pose head is frame-wise and must ignore the conditioning.
    CHECK(max_abs_diff(ab.poses[0].rotation, ba.poses[0].rotation) == 0.0);
}

TEST_CASE("curriculum schedule") {
    CHECK(curriculum(0, 1, 1).max_views == 8);
    CHECK(curriculum(1500, 1, 1).max_views == 8);
    CHECK(curriculum(75000, 1, 1).max_views == 64);
    CHECK(curriculum(200000, 1, 1).max_views == 64);
    CHECK(curriculum(38250, 1, 1).max_views == 36);  // linear midpoint

    CHECK(curriculum(0, 2, 1).min_chunk == 8);
    CHECK(curriculum(12500, 2, 1).min_chunk == 6);  // linear midpoint
    CHECK(curriculum(25000, 2, 1).min_chunk == 4);
    CHECK(curriculum(49999, 2, 1).min_chunk == 4);
    CHECK(curriculum(0, 3, 1).min_chunk == 4);

    for (int stage : {1, 2, 3})
        for (long long step : {0ll, 12500ll, 80000ll}) {
            const CurriculumSample s = curriculum(step, stage, 7);
            REQUIRE(!s.chunk_sizes.empty());
            CHECK(s.chunk_sizes[0] == 8);
            int total = 0;
            for (std::size_t i = 0; i < s.chunk_sizes.size(); ++i) {
                if (i > 0 && i + 1 < s.chunk_sizes.size()) {
                    CHECK(s.chunk_sizes[i] >= s.min_chunk);
                    CHECK(s.chunk_sizes[i] <= 8);
                }
                total += s.chunk_sizes[i];
            }
            CHECK(total == s.max_views);
        }

    CHECK_THROWS_AS(curriculum(0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(curriculum(-1, 1, 1), std::invalid_argument);
}

TEST_SUITE_END();
