#include <cmath>
#include <cstring>

#include "naima/error.hpp"
#include "naima/kernels.hpp"
#include "naima/rng.hpp"
#include "naima/serialize.hpp"
#include "naima/tokens.hpp"

// Frozen ViT-S/14-geometry forward pass. Inference only — the backward pass
// deliberately does not exist, which makes the frozen contract structural.

namespace naima {

namespace {

template <typename T>
void layer_norm_rows(std::vector<T>& x, int m, int d, const Tensor<T>& w,
                     const Tensor<T>& b) {
  constexpr double eps = 1e-6;
  for (int i = 0; i < m; ++i) {
    T* row = x.data() + static_cast<std::size_t>(i) * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += row[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double t = row[j] - mean;
      var += t * t;
    }
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < d; ++j)
      row[j] = static_cast<T>((row[j] - mean) * inv) * w.data()[j] + b.data()[j];
  }
}

template <typename T>
void add_bias_rows(std::vector<T>& x, int m, int d, const Tensor<T>& b) {
  for (int i = 0; i < m; ++i) {
    T* row = x.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) row[j] += b.data()[j];
  }
}

template <typename T>
void gelu(std::vector<T>& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  for (auto& v : x)
    v = static_cast<T>(0.5 * static_cast<double>(v) *
                       (1.0 + std::erf(static_cast<double>(v) * inv_sqrt2)));
}

}  // namespace

template <typename T>
VitTokenProvider<T>::VitTokenProvider(const std::string& weights_path) {
  const BlobFile bf = BlobFile::load(weights_path);

  std::uint64_t fp = 0xCBF29CE484222325ULL;
  for (const auto& [name, e] : bf.entries()) {
    fp = fnv1a64(name.data(), name.size(), fp);
    fp = fnv1a64(e.bytes.data(), e.bytes.size(), fp);
  }
  fingerprint_ = fp;

  auto tensor = [&](const std::string& name) {
    return bf.get_tensor<float>(name).template cast<T>();
  };

  patch_b_ = tensor("patch_embed.bias");
  embed_dim_ = patch_b_.width();
  patch_w_ = tensor("patch_embed.weight");
  if (patch_w_.channels() != embed_dim_ || patch_w_.height() != 3 ||
      patch_w_.width() != 196)
    throw FormatError("patch_embed.weight must be D x 3 x 196", 0);
  cls_token_ = tensor("cls_token");
  pos_cls_ = tensor("pos_embed.cls");
  pos_grid_embed_ = tensor("pos_embed.grid");
  if (pos_grid_embed_.channels() != embed_dim_ ||
      pos_grid_embed_.height() != pos_grid_embed_.width())
    throw FormatError("pos_embed.grid must be D x g x g", 0);
  pos_grid_ = pos_grid_embed_.height();
  heads_ = static_cast<int>(bf.get_scalar("meta.heads"));
  if (heads_ <= 0 || embed_dim_ % heads_ != 0)
    throw FormatError("meta.heads must divide the embed dim", 0);

  for (int i = 0;; ++i) {
    const std::string p = "blocks." + std::to_string(i) + ".";
    if (!bf.has(p + "norm1.weight")) break;
    Block blk;
    blk.norm1_w = tensor(p + "norm1.weight");
    blk.norm1_b = tensor(p + "norm1.bias");
    blk.qkv_w = tensor(p + "attn.qkv.weight");
    blk.qkv_b = tensor(p + "attn.qkv.bias");
    blk.proj_w = tensor(p + "attn.proj.weight");
    blk.proj_b = tensor(p + "attn.proj.bias");
    blk.norm2_w = tensor(p + "norm2.weight");
    blk.norm2_b = tensor(p + "norm2.bias");
    blk.fc1_w = tensor(p + "mlp.fc1.weight");
    blk.fc1_b = tensor(p + "mlp.fc1.bias");
    blk.fc2_w = tensor(p + "mlp.fc2.weight");
    blk.fc2_b = tensor(p + "mlp.fc2.bias");
    blocks_.push_back(std::move(blk));
  }
  if (blocks_.size() < 4)
    throw FormatError("transformer needs at least 4 blocks, found " +
                      std::to_string(blocks_.size()), 0);
  const int d = static_cast<int>(blocks_.size());
  taps_ = {d / 4, d / 2, 3 * d / 4, d};
}

template <typename T>
TokenSet<T> VitTokenProvider<T>::extract(const Tensor<T>& rgb) const {
  if (rgb.channels() != 3) throw ShapeError("extract: want 3-channel rgb");
  if (rgb.height() % 14 != 0 || rgb.width() % 14 != 0)
    throw ShapeError("token extraction needs dims divisible by 14, got " +
                     rgb.shape_str());
  const int gh = rgb.height() / 14, gw = rgb.width() / 14;
  const int nt = gh * gw, m = nt + 1, d = embed_dim_;

  // patch embedding: each 3x14x14 patch -> one token row
  std::vector<T> x(static_cast<std::size_t>(m) * d);
  std::vector<T> patch(3 * 196);
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx) {
      for (int c = 0; c < 3; ++c)
        for (int py = 0; py < 14; ++py)
          for (int px = 0; px < 14; ++px)
            patch[(static_cast<std::size_t>(c) * 14 + py) * 14 + px] =
                rgb.at(c, gy * 14 + py, gx * 14 + px);
      T* row = x.data() + static_cast<std::size_t>(1 + gy * gw + gx) * d;
      for (int oc = 0; oc < d; ++oc)
        row[oc] = kernels::dot(patch.data(),
                               patch_w_.data() + static_cast<std::size_t>(oc) * 3 * 196,
                               patch.size()) +
                  patch_b_.data()[oc];
    }
  for (int j = 0; j < d; ++j) x[j] = cls_token_.data()[j] + pos_cls_.data()[j];

  // interpolate the base position grid to this token grid
  Tensor<T> pos(d, gh, gw);
  kernels::bilinear_resize_forward(pos_grid_embed_.data(), d, pos_grid_,
                                   pos_grid_, gh, gw, pos.data());
  for (int gy = 0; gy < gh; ++gy)
    for (int gx = 0; gx < gw; ++gx) {
      T* row = x.data() + static_cast<std::size_t>(1 + gy * gw + gx) * d;
      for (int c = 0; c < d; ++c) row[c] += pos.at(c, gy, gx);
    }

  TokenSet<T> ts;
  ts.embed_dim = d;
  for (int i = 0; i < 4; ++i) ts.source_layers[i] = taps_[i];

  const int hd = d / heads_;
  std::vector<T> norm, qkv, q, kt, vt, attn_y, heads_out, mlp1;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const Block& blk = blocks_[bi];

    // x = x + proj(MHA(LN1(x)))
    norm = x;
    layer_norm_rows(norm, m, d, blk.norm1_w, blk.norm1_b);
    qkv.assign(static_cast<std::size_t>(m) * 3 * d, T(0));
    kernels::gemm_nt(m, d, 3 * d, norm.data(), blk.qkv_w.data(), qkv.data());
    add_bias_rows(qkv, m, 3 * d, blk.qkv_b);
    heads_out.assign(static_cast<std::size_t>(m) * d, T(0));
    q.resize(static_cast<std::size_t>(m) * hd);
    kt.resize(static_cast<std::size_t>(hd) * m);
    vt.resize(static_cast<std::size_t>(hd) * m);
    attn_y.resize(static_cast<std::size_t>(m) * hd);
    for (int h = 0; h < heads_; ++h) {
      for (int i = 0; i < m; ++i) {
        const T* row = qkv.data() + static_cast<std::size_t>(i) * 3 * d;
        for (int j = 0; j < hd; ++j) {
          q[static_cast<std::size_t>(i) * hd + j] = row[h * hd + j];
          kt[static_cast<std::size_t>(j) * m + i] = row[d + h * hd + j];
          vt[static_cast<std::size_t>(j) * m + i] = row[2 * d + h * hd + j];
        }
      }
      const int bad = kernels::attention_forward(q.data(), kt.data(), vt.data(),
                                                 m, hd, hd, static_cast<T*>(nullptr),
                                                 attn_y.data());
      if (bad > 0)
        throw NumericError("non-finite attention logits in transformer block " +
                           std::to_string(bi) + ", head " + std::to_string(h));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < hd; ++j)
          heads_out[static_cast<std::size_t>(i) * d + h * hd + j] =
              attn_y[static_cast<std::size_t>(i) * hd + j];
    }
    norm.assign(static_cast<std::size_t>(m) * d, T(0));
    kernels::gemm_nt(m, d, d, heads_out.data(), blk.proj_w.data(), norm.data());
    add_bias_rows(norm, m, d, blk.proj_b);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += norm[i];

    // x = x + fc2(gelu(fc1(LN2(x))))
    norm = x;
    layer_norm_rows(norm, m, d, blk.norm2_w, blk.norm2_b);
    const int hidden = blk.fc1_w.height();
    mlp1.assign(static_cast<std::size_t>(m) * hidden, T(0));
    kernels::gemm_nt(m, d, hidden, norm.data(), blk.fc1_w.data(), mlp1.data());
    add_bias_rows(mlp1, m, hidden, blk.fc1_b);
    gelu(mlp1);
    norm.assign(static_cast<std::size_t>(m) * d, T(0));
    kernels::gemm_nt(m, hidden, d, mlp1.data(), blk.fc2_w.data(), norm.data());
    add_bias_rows(norm, m, d, blk.fc2_b);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += norm[i];

    // tap the patch tokens (cls dropped), pre-final-norm
    for (int t = 0; t < 4; ++t) {
      if (taps_[t] != static_cast<int>(bi) + 1) continue;
      Tensor<T> grid(d, gh, gw);
      for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
          const T* row = x.data() + static_cast<std::size_t>(1 + gy * gw + gx) * d;
          for (int c = 0; c < d; ++c) grid.at(c, gy, gx) = row[c];
        }
      ts.levels.push_back(std::move(grid));
    }
  }
  if (ts.levels.size() != 4)
    throw ShapeError("expected 4 tapped levels, got " + std::to_string(ts.levels.size()));
  return ts;
}

template class VitTokenProvider<float>;
template class VitTokenProvider<double>;

}  // namespace naima
