// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/memory_report.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "ssplat/rng.hpp"

namespace ssplat {

namespace {

// Live cache bytes after streaming N minimal images through the decoder.
std::size_t measure_cache_bytes(const StreamModel& model, int images, int chunk_size) {
    const int side = model.profile().patch_size;  // one patch token per view
    CompressedKvCache cache(model.profile(), CachePolicy::compressed);
    Rng rng(model.profile().seed);
    int done = 0;
    while (done < images) {
        const int count = done == 0 ? 8 : std::min(chunk_size, images - done);
        std::vector<FeatureImage> chunk_images;
        for (int v = 0; v < count; ++v) {
            FeatureImage img(side, side, 3);
            for (auto& px : img.data()) px = rng.uniform();
            chunk_images.push_back(std::move(img));
        }
        model.decode_chunk(model.encode_chunk(chunk_images), cache);
        done += count;
    }
    return cache.byte_size();
}

}  // namespace

MemoryReport memory_report(const std::vector<int>& image_counts, const std::vector<int>& chunk_sizes,
                           const ModelProfile& profile, bool measure) {
    profile.validate();
    MemoryReport report;
    report.layer_pairs = profile.layer_pairs;
    report.cached_layers = profile.cached_global_layers;

    StreamModel model(profile);
    for (int n : chunk_sizes)
        for (int images : image_counts) {
            MemoryReportRow row;
            row.images = images;
            row.chunk_size = n;
            row.compressed = token_set_count(images, n, profile.cached_global_layers);
            row.baseline = baseline_token_set_count(images, profile.layer_pairs);
            row.reduction_pct =
                100.0 * (1.0 - static_cast<double>(row.compressed) / static_cast<double>(row.baseline));
            if (measure && images <= 1024) row.measured_bytes = measure_cache_bytes(model, images, n);
            report.rows.push_back(row);
        }
    return report;
}

std::string MemoryReport::to_text() const {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof(buf), "layers=%d cached=%d\n", layer_pairs, cached_layers);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%8s %6s %12s %12s %10s %14s\n", "images", "chunk", "compressed",
                  "baseline", "saved(%)", "cache(bytes)");
    out += buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%8d %6d %12lld %12lld %9.1f%% %14zu\n", r.images, r.chunk_size,
                      r.compressed, r.baseline, r.reduction_pct, r.measured_bytes);
        out += buf;
    }
    return out;
}

std::string MemoryReport::to_json() const {
    nlohmann::json j;
    j["layer_pairs"] = layer_pairs;
    j["cached_layers"] = cached_layers;
    auto& rows_json = j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"images", r.images},
                             {"chunk_size", r.chunk_size},
                             {"compressed", r.compressed},
                             {"baseline", r.baseline},
                             {"reduction_pct", r.reduction_pct},
                             {"measured_bytes", r.measured_bytes}});
    return j.dump(2) + "\n";
}

}  // namespace ssplat
