// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
//
// Compares the OpenMP kernels against their serial references: the tiled
// renderer vs the exhaustive per-pixel pass, and the cached decoder vs the
// full-history reference, with the compressed cache timed alongside.
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssplat/reference.hpp"
#include "ssplat/rng.hpp"
#include "ssplat/stream.hpp"
#include "ssplat/synthetic.hpp"

using namespace ssplat;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

bool bitwise_equal(const FeatureImage& a, const FeatureImage& b) {
    if (a.data().size() != b.data().size()) return false;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        if (a.data()[i] != b.data()[i]) return false;
    return true;
}

void bench_render() {
    SceneConfig cfg;
    cfg.gaussian_count = 3000;
    cfg.image_width = 256;
    cfg.image_height = 256;
    cfg.focal = 280.0;
    const SyntheticScene scene = generate_scene(cfg, 7);
    const RigidPose& cam = scene.poses[0];
    const Intrinsics& k = scene.intrinsics[0];

    std::printf("render: %d gaussians at %dx%d\n", cfg.gaussian_count, k.width, k.height);

    double t0 = now_ms();
    const FeatureImage ref = reference_render(scene.world, cam, k);
    const double t_ref = now_ms() - t0;
    std::printf("  serial reference      %8.2f ms\n", t_ref);

#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
#else
    const int max_threads = 1;
#endif
    for (int threads = 1; threads <= max_threads; threads *= 2) {
#ifdef _OPENMP
        omp_set_num_threads(threads);
#endif
        t0 = now_ms();
        const FeatureImage img = render(scene.world, cam, k);
        const double t = now_ms() - t0;
        std::printf("  tiled omp x%-2d         %8.2f ms  speedup %.2fx  bitwise %s\n", threads, t,
                    t_ref / t, bitwise_equal(img, ref) ? "OK" : "MISMATCH");
    }
#ifdef _OPENMP
    omp_set_num_threads(max_threads);
#endif
}

void bench_decoder() {
    const ModelProfile profile = ModelProfile::toy(11);
    StreamModel model(profile);
    const int frames = 40, chunk_size = 4, side = 32;

    Rng rng(3);
    std::vector<std::vector<FeatureImage>> chunks;
    int done = 0;
    while (done < frames) {
        const int count = done == 0 ? 8 : std::min(chunk_size, frames - done);
        std::vector<FeatureImage> images;
        for (int v = 0; v < count; ++v) {
            FeatureImage img(side, side, 3);
            for (auto& px : img.data()) px = rng.uniform();
            images.push_back(std::move(img));
        }
        chunks.push_back(std::move(images));
        done += count;
    }

    std::printf("decoder: %d frames, chunk %d, %dx%d images, toy profile\n", frames, chunk_size, side,
                side);

    double t0 = now_ms();
    ReferenceDecoder reference(model);
    for (const auto& images : chunks) reference.decode_chunk(model.encode_chunk(images));
    std::printf("  full-history reference %7.2f ms\n", now_ms() - t0);

    t0 = now_ms();
    CompressedKvCache uncompressed(profile, CachePolicy::retain_all);
    for (const auto& images : chunks) model.decode_chunk(model.encode_chunk(images), uncompressed);
    std::printf("  retain-all cache       %7.2f ms  (%d token sets)\n", now_ms() - t0,
                uncompressed.token_set_count());

    t0 = now_ms();
    CompressedKvCache compressed(profile, CachePolicy::compressed);
    for (const auto& images : chunks) model.decode_chunk(model.encode_chunk(images), compressed);
    std::printf("  compressed cache       %7.2f ms  (%d token sets, %.1f%% saved)\n", now_ms() - t0,
                compressed.token_set_count(),
                100.0 * (1.0 - static_cast<double>(compressed.token_set_count()) /
                                   uncompressed.token_set_count()));
}

}  // namespace

int main() {
    bench_render();
    bench_decoder();
    return 0;
}
