// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ssplat/model.hpp"

namespace ssplat {

struct MemoryReportRow {
    int images = 0;
    int chunk_size = 0;
    long long compressed = 0;   // retained token sets
    long long baseline = 0;     // uncompressed token sets
    double reduction_pct = 0.0;
    std::size_t measured_bytes = 0;  // live cache size from a toy run, 0 if skipped
};

struct MemoryReport {
    int layer_pairs = 0;
    int cached_layers = 0;
    std::vector<MemoryReportRow> rows;

    std::string to_text() const;
    std::string to_json() const;
};

// Token-set accounting for each (N, n) pair; with measure set, each row also
// runs the toy decoder over an N-frame stream of minimal images and reports
// the live cache byte size.
MemoryReport memory_report(const std::vector<int>& image_counts, const std::vector<int>& chunk_sizes,
                           const ModelProfile& profile, bool measure = true);

}  // namespace ssplat
