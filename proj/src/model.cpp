// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssplat/rng.hpp"

namespace ssplat {

ModelProfile ModelProfile::toy(uint64_t seed) {
    ModelProfile p;
    p.seed = seed;
    return p;
}

ModelProfile ModelProfile::paper_fidelity(uint64_t seed) {
    ModelProfile p;
    p.layer_pairs = 18;
    p.cached_global_layers = 8;
    p.seed = seed;
    return p;
}

void ModelProfile::validate() const {
    if (d_model < 1 || heads < 1 || layer_pairs < 1 || patch_size < 1 || mlp_hidden < 1 || d_cond < 1)
        throw std::invalid_argument("profile: dimensions must be positive");
    if (d_model % heads != 0) throw std::invalid_argument("profile: d_model must divide into heads");
    if (cached_global_layers < 1 || cached_global_layers > layer_pairs)
        throw std::invalid_argument("profile: cached layers out of [1, layer_pairs]");
}

int token_set_count(int images, int chunk_size, int cached_layers) {
    if (images < 8) throw std::invalid_argument("token_set_count: first chunk must be full (N >= 8)");
    if (chunk_size < 1 || chunk_size > 8)
        throw std::invalid_argument("token_set_count: chunk size out of [1, 8]");
    const int later_chunks = (images - 8 + chunk_size - 1) / chunk_size;
    return cached_layers * (8 + later_chunks);
}

long long baseline_token_set_count(int images, int layers) {
    return static_cast<long long>(layers) * images;
}

CompressedKvCache::CompressedKvCache(const ModelProfile& profile, CachePolicy policy)
    : policy_(policy), layer_pairs_(profile.layer_pairs) {
    profile.validate();
    const int slots = policy == CachePolicy::compressed ? profile.cached_global_layers : profile.layer_pairs;
    layers_.resize(slots);
}

int CompressedKvCache::slot_for_pair(int pair) const {
    if (policy_ == CachePolicy::retain_all) return pair;
    const int truncated = layer_pairs_ - static_cast<int>(layers_.size());
    return pair >= truncated ? pair - truncated : -1;
}

int CompressedKvCache::token_set_count() const {
    int n = 0;
    for (const auto& layer : layers_) n += static_cast<int>(layer.size());
    return n;
}

std::size_t CompressedKvCache::byte_size() const {
    std::size_t bytes = 0;
    for (const auto& layer : layers_)
        for (const auto& block : layer) bytes += block.tokens.a.size() * sizeof(double);
    return bytes;
}

void CompressedKvCache::record_chunk(int view_count, std::vector<int> retained_ids) {
    views_seen_ += view_count;
    schedule_.push_back(std::move(retained_ids));
}

namespace model_detail {

Matrix layer_normed(const Matrix& x) {
    Matrix out(x.rows, x.cols);
    for (int r = 0; r < x.rows; ++r) {
        const double* in = x.row(r);
        double mean = 0.0;
        for (int c = 0; c < x.cols; ++c) mean += in[c];
        mean /= x.cols;
        double var = 0.0;
        for (int c = 0; c < x.cols; ++c) var += (in[c] - mean) * (in[c] - mean);
        var /= x.cols;
        const double inv = 1.0 / std::sqrt(var + 1e-5);
        double* o = out.row(r);
        for (int c = 0; c < x.cols; ++c) o[c] = (in[c] - mean) * inv;
    }
    return out;
}

namespace {

// out = x * w^T
Matrix matmul_nt(const Matrix& x, const Matrix& w) {
    Matrix out(x.rows, w.rows);
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double* o = out.row(r);
        for (int j = 0; j < w.rows; ++j) {
            const double* wr = w.row(j);
            double s = 0.0;
            for (int c = 0; c < x.cols; ++c) s += xr[c] * wr[c];
            o[j] = s;
        }
    }
    return out;
}

Matrix seeded_matrix(Rng rng, int rows, int cols) {
    Matrix m(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& v : m.a) v = rng.uniform(-bound, bound);
    return m;
}

}  // namespace

BlockWeights seeded_block(uint64_t seed, int d_q, int d_ctx, int mlp_hidden) {
    Rng rng(seed);
    BlockWeights w;
    w.wq = seeded_matrix(rng.fork(0), d_q, d_q);
    w.wk = seeded_matrix(rng.fork(1), d_q, d_ctx);
    w.wv = seeded_matrix(rng.fork(2), d_q, d_ctx);
    w.wo = seeded_matrix(rng.fork(3), d_q, d_q);
    w.mlp1 = seeded_matrix(rng.fork(4), mlp_hidden, d_q);
    w.mlp2 = seeded_matrix(rng.fork(5), d_q, mlp_hidden);
    return w;
}

void block_forward(Matrix& x, const Matrix& ctx, const BlockWeights& w, int heads,
                   bool parallel_rows) {
    const int d = x.cols;
    const int dh = d / heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

    const Matrix xn = layer_normed(x);
    const Matrix cn = layer_normed(ctx);
    const Matrix q = matmul_nt(xn, w.wq);
    const Matrix k = matmul_nt(cn, w.wk);
    const Matrix v = matmul_nt(cn, w.wv);

    Matrix attn(x.rows, d);
    const int nctx = ctx.rows;
#pragma omp parallel for schedule(static) if (parallel_rows)
    for (int r = 0; r < x.rows; ++r) {
        std::vector<double> scores(nctx);
        for (int h = 0; h < heads; ++h) {
            const int off = h * dh;
            const double* qr = q.row(r) + off;
            double max_score = -1e300;
            for (int i = 0; i < nctx; ++i) {
                const double* kr = k.row(i) + off;
                double s = 0.0;
                for (int c = 0; c < dh; ++c) s += qr[c] * kr[c];
                s *= inv_sqrt_dh;
                scores[i] = s;
                if (s > max_score) max_score = s;
            }
            double denom = 0.0;
            for (int i = 0; i < nctx; ++i) {
                scores[i] = std::exp(scores[i] - max_score);
                denom += scores[i];
            }
            double* o = attn.row(r) + off;
            for (int c = 0; c < dh; ++c) o[c] = 0.0;
            for (int i = 0; i < nctx; ++i) {
                const double wgt = scores[i] / denom;
                const double* vr = v.row(i) + off;
                for (int c = 0; c < dh; ++c) o[c] += wgt * vr[c];
            }
        }
    }

    const Matrix proj = matmul_nt(attn, w.wo);
    for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] += proj.a[i];

    const Matrix xn2 = layer_normed(x);
    Matrix hidden = matmul_nt(xn2, w.mlp1);
    for (auto& h : hidden.a)
        if (h < 0.0) h = 0.0;
    const Matrix mlp_out = matmul_nt(hidden, w.mlp2);
    for (std::size_t i = 0; i < x.a.size(); ++i) x.a[i] += mlp_out.a[i];
}

}  // namespace model_detail

namespace {

using model_detail::block_forward;
using model_detail::seeded_block;

// Fork ids for the deterministic weight streams.
constexpr uint64_t kStreamPatchEmbed = 100;
constexpr uint64_t kStreamCameraToken = 101;
constexpr uint64_t kStreamIntrinsics = 102;
constexpr uint64_t kStreamRegister = 103;
constexpr uint64_t kStreamDecoder = 1000;
constexpr uint64_t kStreamHeadXyz = 2000;
constexpr uint64_t kStreamHeadAttr = 2100;
constexpr uint64_t kStreamHeadFeat = 2200;
constexpr uint64_t kStreamHeadPose = 2300;
constexpr uint64_t kStreamPatchPos = 1u << 20;
constexpr uint64_t kStreamCellPos = 1u << 21;

std::vector<double> seeded_vector(Rng rng, int n, double bound) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return v;
}

uint64_t sub_seed(const Rng& root, uint64_t stream) {
    Rng r = root.fork(stream);
    return r.next_u64();
}

}  // namespace

StreamModel::StreamModel(const ModelProfile& profile) : profile_(profile) {
    profile_.validate();
    const int d = profile_.d_model;
    const Rng root(profile_.seed);

    const int patch_dim = 3 * profile_.patch_size * profile_.patch_size;
    {
        Rng rng = root.fork(kStreamPatchEmbed);
        patch_embed_ = Matrix(d, patch_dim);
        const double bound = 1.0 / std::sqrt(static_cast<double>(patch_dim));
        for (auto& v : patch_embed_.a) v = rng.uniform(-bound, bound);
        patch_embed_bias_ = seeded_vector(rng, d, bound);
    }
    camera_token_ = seeded_vector(root.fork(kStreamCameraToken), d, 1.0 / std::sqrt(double(d)));
    {
        Rng rng = root.fork(kStreamIntrinsics);
        intr_w1_ = Matrix(32, d);
        const double b1 = 1.0 / std::sqrt(double(d));
        for (auto& v : intr_w1_.a) v = rng.uniform(-b1, b1);
        intr_w2_ = Matrix(2, 32);
        const double b2 = 1.0 / std::sqrt(32.0);
        for (auto& v : intr_w2_.a) v = rng.uniform(-b2, b2);
    }
    register_embedding_ = seeded_vector(root.fork(kStreamRegister), d, 1.0 / std::sqrt(double(d)));

    layers_.resize(profile_.layer_pairs);
    for (int p = 0; p < profile_.layer_pairs; ++p) {
        layers_[p].frame = seeded_block(sub_seed(root, kStreamDecoder + 2 * p), d, d, profile_.mlp_hidden);
        layers_[p].global =
            seeded_block(sub_seed(root, kStreamDecoder + 2 * p + 1), d, d, profile_.mlp_hidden);
    }

    auto make_head = [&](uint64_t base, int out_dim, int d_ctx) {
        HeadWeights hw;
        hw.blocks.reserve(5);
        for (int i = 0; i < 5; ++i)
            hw.blocks.push_back(seeded_block(sub_seed(root, base + i), d, d_ctx, profile_.mlp_hidden));
        Rng rng = root.fork(base + 9);
        hw.out_proj = Matrix(out_dim, d);
        const double bound = 1.0 / std::sqrt(double(d));
        for (auto& v : hw.out_proj.a) v = rng.uniform(-bound, bound);
        return hw;
    };
    head_xyz_ = make_head(kStreamHeadXyz, 3, profile_.d_cond);
    head_attr_ = make_head(kStreamHeadAttr, 8, profile_.d_cond);
    head_feat_ = make_head(kStreamHeadFeat, 9, profile_.d_cond);
    head_pose_ = make_head(kStreamHeadPose, 9, d);  // self-attention stack; out_proj unused
    {
        Rng rng = root.fork(kStreamHeadPose + 20);
        pose_mlp1_ = Matrix(64, d);
        const double b1 = 1.0 / std::sqrt(double(d));
        for (auto& v : pose_mlp1_.a) v = rng.uniform(-b1, b1);
        pose_mlp2_ = Matrix(9, 64);
        const double b2 = 1.0 / std::sqrt(64.0);
        for (auto& v : pose_mlp2_.a) v = rng.uniform(-b2, b2);
    }
}

EncodedChunk StreamModel::encode_chunk(const std::vector<FeatureImage>& images) const {
    const int views = static_cast<int>(images.size());
    if (views < 1 || views > 8) throw std::invalid_argument("encode_chunk: chunk size out of [1, 8]");
    const int w = images[0].width(), h = images[0].height();
    const int p = profile_.patch_size;
    if (w % p != 0 || h % p != 0)
        throw std::invalid_argument("encode_chunk: image size must be divisible by the patch size");
    for (const auto& img : images)
        if (img.channels() != 3 || img.width() != w || img.height() != h)
            throw std::invalid_argument("encode_chunk: images must be RGB and equally sized");

    const int d = profile_.d_model;
    EncodedChunk chunk;
    chunk.grid_w = w / p;
    chunk.grid_h = h / p;
    chunk.image_width = w;
    chunk.image_height = h;
    const int tokens_per_view = 1 + chunk.grid_w * chunk.grid_h;
    chunk.view_tokens.assign(views, Matrix(tokens_per_view, d));

    const Rng root(profile_.seed);

#pragma omp parallel for schedule(static)
    for (int v = 0; v < views; ++v) {
        Matrix& t = chunk.view_tokens[v];
        for (int c = 0; c < d; ++c) t.at(0, c) = camera_token_[c];
        std::vector<double> patch(3 * p * p);
        for (int gy = 0; gy < chunk.grid_h; ++gy)
            for (int gx = 0; gx < chunk.grid_w; ++gx) {
                const int idx = gy * chunk.grid_w + gx;
                std::size_t at = 0;
                for (int c = 0; c < 3; ++c)
                    for (int y = 0; y < p; ++y)
                        for (int x = 0; x < p; ++x)
                            patch[at++] = images[v].at(c, gy * p + y, gx * p + x);
                const std::vector<double> pos =
                    seeded_vector(root.fork(kStreamPatchPos + idx), d, 1.0 / std::sqrt(double(d)));
                double* row = t.row(1 + idx);
                for (int c = 0; c < d; ++c) {
                    const double* er = patch_embed_.row(c);
                    double s = patch_embed_bias_[c];
                    for (int k = 0; k < static_cast<int>(patch.size()); ++k) s += er[k] * patch[k];
                    row[c] = s + pos[c];
                }
            }
    }

    // Intrinsics head: 2-layer map on the camera token, exp keeps focals
    // positive; principal point at the image center.
    std::vector<double> hidden(32, 0.0);
    for (int i = 0; i < 32; ++i) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += intr_w1_.at(i, c) * camera_token_[c];
        hidden[i] = s > 0.0 ? s : 0.0;
    }
    double fo[2];
    for (int i = 0; i < 2; ++i) {
        double s = 0.0;
        for (int c = 0; c < 32; ++c) s += intr_w2_.at(i, c) * hidden[c];
        fo[i] = s;
    }
    const double base = static_cast<double>(std::max(w, h));
    const Intrinsics pred(base * std::exp(fo[0]), base * std::exp(fo[1]), w / 2.0, h / 2.0, w, h);
    chunk.pred_intrinsics.assign(views, pred);
    return chunk;
}

std::vector<Matrix> StreamModel::decode_chunk(const EncodedChunk& chunk,
                                              CompressedKvCache& cache) const {
    const int views = static_cast<int>(chunk.view_tokens.size());
    if (views < 1 || views > 8) throw std::invalid_argument("decode_chunk: chunk exceeds 8 views");
    if (cache.empty() && views != 8)
        throw std::invalid_argument("decode_chunk: first chunk must have 8 views");
    const int expected_slots = cache.policy() == CachePolicy::compressed
                                   ? profile_.cached_global_layers
                                   : profile_.layer_pairs;
    if (cache.cached_layer_count() != expected_slots)
        throw std::invalid_argument("decode_chunk: cache is inconsistent with the profile");

    const int d = profile_.d_model;
    const int tpv = chunk.view_tokens[0].rows;
    std::vector<Matrix> x = chunk.view_tokens;
    std::vector<Matrix> snapshots(cache.cached_layer_count());

    for (int pair = 0; pair < profile_.layer_pairs; ++pair) {
        // Frame attention: each view attends within itself.
#pragma omp parallel for schedule(static)
        for (int v = 0; v < views; ++v)
            block_forward(x[v], x[v], layers_[pair].frame, profile_.heads, false);

        // Global attention over cached context + current chunk.
        Matrix current(views * tpv, d);
        for (int v = 0; v < views; ++v)
            std::copy_n(x[v].a.begin(), x[v].a.size(), current.a.begin() + static_cast<std::size_t>(v) * tpv * d);

        const int slot = cache.slot_for_pair(pair);
        if (slot >= 0) snapshots[slot] = current;

        int ctx_rows = views * tpv;
        if (slot >= 0)
            for (const auto& block : cache.layer(slot)) ctx_rows += block.tokens.rows;

        if (slot >= 0 && ctx_rows > views * tpv) {
            Matrix ctx(ctx_rows, d);
            std::size_t at = 0;
            for (const auto& block : cache.layer(slot)) {
                std::copy_n(block.tokens.a.begin(), block.tokens.a.size(), ctx.a.begin() + at);
                at += block.tokens.a.size();
            }
            std::copy_n(current.a.begin(), current.a.size(), ctx.a.begin() + at);
            block_forward(current, ctx, layers_[pair].global, profile_.heads, true);
        } else {
            block_forward(current, current, layers_[pair].global, profile_.heads, true);
        }

        for (int v = 0; v < views; ++v)
            std::copy_n(current.a.begin() + static_cast<std::size_t>(v) * tpv * d, x[v].a.size(),
                        x[v].a.begin());
    }

    // Retention: all views for the first chunk, the final view afterwards
    // (every view under retain_all, which also skips the register marking).
    const bool first_chunk = cache.empty();
    std::vector<int> retained_local;
    if (cache.policy() == CachePolicy::retain_all || first_chunk) {
        for (int v = 0; v < views; ++v) retained_local.push_back(v);
    } else {
        retained_local.push_back(views - 1);
    }

    std::vector<int> retained_ids;
    for (int slot = 0; slot < cache.cached_layer_count(); ++slot) {
        for (int v : retained_local) {
            CacheBlock block;
            block.view_id = cache.views_seen() + v;
            block.tokens = Matrix(tpv, d);
            std::copy_n(snapshots[slot].a.begin() + static_cast<std::size_t>(v) * tpv * d,
                        block.tokens.a.size(), block.tokens.a.begin());
            if (cache.policy() == CachePolicy::compressed)
                for (int r = 0; r < tpv; ++r)
                    for (int c = 0; c < d; ++c) block.tokens.at(r, c) += register_embedding_[c];
            cache.push_block(slot, std::move(block));
        }
    }
    for (int v : retained_local) retained_ids.push_back(cache.views_seen() + v);
    cache.record_chunk(views, std::move(retained_ids));
    return x;
}

std::vector<RigidPose> StreamModel::predict_poses(const std::vector<Matrix>& features) const {
    std::vector<RigidPose> poses(features.size());
    for (std::size_t v = 0; v < features.size(); ++v) {
        Matrix t = features[v];
        for (const auto& blk : head_pose_.blocks) block_forward(t, t, blk, profile_.heads, true);
        std::vector<double> pooled(profile_.d_model, 0.0);
        for (int r = 0; r < t.rows; ++r)
            for (int c = 0; c < t.cols; ++c) pooled[c] += t.at(r, c);
        for (auto& p : pooled) p /= t.rows;

        std::vector<double> hidden(64, 0.0);
        for (int i = 0; i < 64; ++i) {
            double s = 0.0;
            for (int c = 0; c < profile_.d_model; ++c) s += pose_mlp1_.at(i, c) * pooled[c];
            hidden[i] = s > 0.0 ? s : 0.0;
        }
        double out[9];
        for (int i = 0; i < 9; ++i) {
            double s = 0.0;
            for (int c = 0; c < 64; ++c) s += pose_mlp2_.at(i, c) * hidden[c];
            out[i] = s;
        }

        // 6-d rotation representation -> orthonormal frame.
        Vec3 a{out[0], out[1], out[2]}, b{out[3], out[4], out[5]};
        if (a.norm() < 1e-9) a = {1, 0, 0};
        const Vec3 c0 = a.normalized();
        Vec3 c1 = b - c0 * c0.dot(b);
        if (c1.norm() < 1e-9) {
            const Vec3 alt = std::fabs(c0.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
            c1 = alt - c0 * c0.dot(alt);
        }
        c1 = c1.normalized();
        const Vec3 c2 = c0.cross(c1);
        poses[v] = RigidPose(Mat3::from_columns(c0, c1, c2), {out[6], out[7], out[8]});
    }
    return poses;
}

Matrix StreamModel::upsampled_tokens(const Matrix& view_features, int grid_h, int grid_w) const {
    const int d = profile_.d_model;
    const int uh = grid_h * 2, uw = grid_w * 2;
    Matrix up(uh * uw, d);
    const Rng root(profile_.seed);
    for (int y = 0; y < uh; ++y)
        for (int x = 0; x < uw; ++x) {
            const int cell = y * uw + x;
            const int parent = 1 + (y / 2) * grid_w + (x / 2);  // +1 skips the camera token
            const std::vector<double> pos =
                seeded_vector(root.fork(kStreamCellPos + cell), d, 1.0 / std::sqrt(double(d)));
            double* row = up.row(cell);
            for (int c = 0; c < d; ++c) row[c] = view_features.at(parent, c) + pos[c];
        }
    return up;
}

std::vector<GaussianPrimitive> StreamModel::decode_view_gaussians(const Matrix& xyz, const Matrix& attr,
                                                                  const Matrix& feat, const Intrinsics& k,
                                                                  int grid_h, int grid_w) const {
    const int uh = grid_h * 2, uw = grid_w * 2;
    const double cell_w = static_cast<double>(k.width) / uw;
    const double cell_h = static_cast<double>(k.height) / uh;
    std::vector<GaussianPrimitive> out;
    out.reserve(static_cast<std::size_t>(uh) * uw);
    for (int y = 0; y < uh; ++y)
        for (int x = 0; x < uw; ++x) {
            const int cell = y * uw + x;
            GaussianPrimitive g;
            const double u = (x + 0.5) * cell_w + xyz.at(cell, 0);
            const double v = (y + 0.5) * cell_h + xyz.at(cell, 1);
            const double depth = 4.0 * std::exp(std::clamp(0.25 * xyz.at(cell, 2), -2.0, 2.0));
            g.mean = {(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};

            Quat q{1.0 + attr.at(cell, 0), attr.at(cell, 1), attr.at(cell, 2), attr.at(cell, 3)};
            g.orientation = q.norm() < 1e-8 ? Quat{} : q.normalized();
            for (int i = 0; i < 3; ++i)
                g.scale[i] = 0.05 * std::exp(std::clamp(0.5 * attr.at(cell, 4 + i), -4.0, 4.0));
            g.opacity = 1.0 / (1.0 + std::exp(-attr.at(cell, 7)));
            g.color = {1.0 / (1.0 + std::exp(-feat.at(cell, 0))),
                       1.0 / (1.0 + std::exp(-feat.at(cell, 1))),
                       1.0 / (1.0 + std::exp(-feat.at(cell, 2)))};
            for (int i = 0; i < 9; ++i) g.feature[i] = feat.at(cell, i);
            out.push_back(g);
        }
    return out;
}

HeadsOutput StreamModel::run_heads(const EncodedChunk& chunk, const std::vector<Matrix>& features,
                                   const std::vector<ConditioningTokens>& conditioning,
                                   const std::vector<Intrinsics>& intrinsics) const {
    const std::size_t views = features.size();
    if (conditioning.size() != views || intrinsics.size() != views)
        throw std::invalid_argument("run_heads: inputs must be aligned per view");

    HeadsOutput out;
    out.gaussians.resize(views);
    out.poses = predict_poses(features);

    for (std::size_t v = 0; v < views; ++v) {
        const ConditioningTokens& z = conditioning[v];
        Matrix zmat(z.grid_h * z.grid_w, z.dim);
        std::copy(z.data.begin(), z.data.end(), zmat.a.begin());

        const Matrix up = upsampled_tokens(features[v], chunk.grid_h, chunk.grid_w);
        auto head_out = [&](const HeadWeights& hw) {
            Matrix t = up;
            for (const auto& blk : hw.blocks) block_forward(t, zmat, blk, profile_.heads, true);
            return model_detail::matmul_nt(t, hw.out_proj);
        };
        const Matrix xyz = head_out(head_xyz_);
        const Matrix attr = head_out(head_attr_);
        const Matrix feat = head_out(head_feat_);
        out.gaussians[v] =
            decode_view_gaussians(xyz, attr, feat, intrinsics[v], chunk.grid_h, chunk.grid_w);
    }
    return out;
}

}  // namespace ssplat
