// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ssplat/conditioning.hpp"
#include "ssplat/gaussian.hpp"
#include "ssplat/image.hpp"

namespace ssplat {

// Small dense row-major matrix used for token blocks and weights.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
};

struct ModelProfile {
    int d_model = 64;
    int heads = 4;
    int layer_pairs = 6;
    int cached_global_layers = 3;
    int patch_size = 16;
    int mlp_hidden = 128;
    int d_cond = 64;
    uint64_t seed = 0;

    // Toy scale: oracle-equivalence tests must run in seconds.
    static ModelProfile toy(uint64_t seed = 0);
    // Full 18 alternating pairs with the last 8 global layers cached.
    static ModelProfile paper_fidelity(uint64_t seed = 0);

    int truncated_global_layers() const { return layer_pairs - cached_global_layers; }
    void validate() const;
};

// Retained token sets: N = 8 first-chunk views plus one view per later
// chunk, each cached across `cached_layers` global layers. The ceiling
// handles a ragged final chunk.
int token_set_count(int images, int chunk_size, int cached_layers);
// Uncompressed cache: every view in every global layer.
long long baseline_token_set_count(int images, int layers);

// compressed = early-layer truncation + single-view retention + register
// marking. retain_all = no truncation, every view kept, no register; this
// reproduces an uncompressed decoder bitwise.
enum class CachePolicy { compressed, retain_all };

struct CacheBlock {
    int view_id = 0;
    Matrix tokens;  // raw hidden states at the global layer input
};

// Per cached global layer, the retained views' token blocks in append order.
// K/V are projected from these at read time.
class CompressedKvCache {
  public:
    CompressedKvCache() = default;
    CompressedKvCache(const ModelProfile& profile, CachePolicy policy);

    CachePolicy policy() const { return policy_; }
    bool empty() const { return views_seen_ == 0; }
    int views_seen() const { return views_seen_; }
    int cached_layer_count() const { return static_cast<int>(layers_.size()); }
    // Cache slot for a decoder pair index, -1 where history is truncated.
    int slot_for_pair(int pair) const;

    int token_set_count() const;
    std::size_t byte_size() const;

    const std::vector<CacheBlock>& layer(int slot) const { return layers_[slot]; }
    const std::vector<std::vector<int>>& retention_schedule() const { return schedule_; }

    void push_block(int slot, CacheBlock&& block) { layers_[slot].push_back(std::move(block)); }
    void record_chunk(int view_count, std::vector<int> retained_ids);

  private:
    CachePolicy policy_ = CachePolicy::compressed;
    int layer_pairs_ = 0;
    int views_seen_ = 0;
    std::vector<std::vector<CacheBlock>> layers_;
    std::vector<std::vector<int>> schedule_;
};

struct BlockWeights {
    Matrix wq, wk, wv, wo;  // wk/wv map the context width
    Matrix mlp1, mlp2;
};

struct DecoderLayerPair {
    BlockWeights frame, global;
};

struct EncodedChunk {
    int grid_h = 0, grid_w = 0;
    int image_width = 0, image_height = 0;
    std::vector<Matrix> view_tokens;  // per view: (1 + grid) x d, camera token row 0
    std::vector<Intrinsics> pred_intrinsics;
};

struct HeadsOutput {
    std::vector<std::vector<GaussianPrimitive>> gaussians;  // camera-space, per view
    std::vector<RigidPose> poses;
};

// Forward-only alternating-attention decoder with seeded weights. Frame
// layers attend within a view; global layers attend over the current chunk
// plus whatever the cache retains for that layer.
class StreamModel {
  public:
    explicit StreamModel(const ModelProfile& profile);

    const ModelProfile& profile() const { return profile_; }

    EncodedChunk encode_chunk(const std::vector<FeatureImage>& images) const;

    // Runs one chunk through the decoder, then appends the retained views'
    // layer-input states (register-marked under the compressed policy) to the
    // cache. First chunk must have 8 views, later chunks 1..8.
    std::vector<Matrix> decode_chunk(const EncodedChunk& chunk, CompressedKvCache& cache) const;

    std::vector<RigidPose> predict_poses(const std::vector<Matrix>& features) const;

    HeadsOutput run_heads(const EncodedChunk& chunk, const std::vector<Matrix>& features,
                          const std::vector<ConditioningTokens>& conditioning,
                          const std::vector<Intrinsics>& intrinsics) const;

    const std::vector<DecoderLayerPair>& decoder_layers() const { return layers_; }
    std::vector<double>& register_embedding() { return register_embedding_; }
    const std::vector<double>& register_embedding() const { return register_embedding_; }

  private:
    struct HeadWeights {
        std::vector<BlockWeights> blocks;
        Matrix out_proj;
    };

    Matrix upsampled_tokens(const Matrix& view_features, int grid_h, int grid_w) const;
    std::vector<GaussianPrimitive> decode_view_gaussians(const Matrix& xyz, const Matrix& attr,
                                                         const Matrix& feat, const Intrinsics& k,
                                                         int grid_h, int grid_w) const;

    ModelProfile profile_;
    Matrix patch_embed_;  // d x (3 * patch^2)
    std::vector<double> patch_embed_bias_;
    std::vector<double> camera_token_;
    Matrix intr_w1_, intr_w2_;
    std::vector<double> register_embedding_;
    std::vector<DecoderLayerPair> layers_;
    HeadWeights head_xyz_, head_attr_, head_feat_;
    HeadWeights head_pose_;
    Matrix pose_mlp1_, pose_mlp2_;
};

namespace model_detail {

// Row-wise LayerNorm without affine parameters.
Matrix layer_normed(const Matrix& x);
// Pre-norm attention + MLP residual block. Queries come from x, keys/values
// from ctx (pass x itself for self-attention). parallel_rows toggles the
// OpenMP split over query rows.
void block_forward(Matrix& x, const Matrix& ctx, const BlockWeights& w, int heads,
                   bool parallel_rows);
BlockWeights seeded_block(uint64_t seed, int d_q, int d_ctx, int mlp_hidden);

}  // namespace model_detail

}  // namespace ssplat
