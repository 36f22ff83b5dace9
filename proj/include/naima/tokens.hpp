#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "naima/tensor.hpp"

namespace naima {

// Four per-level patch-token grids tapped from the semantic encoder.
template <typename T>
struct TokenSet {
  std::vector<Tensor<T>> levels;  // each embed_dim x (H/14) x (W/14)
  std::array<int, 4> source_layers{3, 6, 9, 12};
  int embed_dim = 0;
};

// Frozen semantic encoder. Providers are read-only after construction; no
// gradient ever flows into them. fingerprint() hashes everything that
// determines outputs, so tests can assert the frozen contract bit-for-bit.
template <typename T>
class TokenProvider {
 public:
  virtual ~TokenProvider() = default;
  virtual TokenSet<T> extract(const Tensor<T>& rgb) const = 0;
  virtual std::uint64_t fingerprint() const = 0;
  virtual std::string name() const = 0;
  virtual int embed_dim() const = 0;
};

// Deterministic offline substitute: tokens are a hash-seeded pseudo-random
// field keyed on (seed, image content, level, channel, grid position),
// smoothed with a 3x3 binomial kernel so attention maps are nondegenerate.
// The image content key is computed from float32 bits, so float and double
// models built from the same float data see the same token values.
template <typename T>
class StubTokenProvider : public TokenProvider<T> {
 public:
  StubTokenProvider(int embed_dim, std::uint64_t seed);
  TokenSet<T> extract(const Tensor<T>& rgb) const override;
  std::uint64_t fingerprint() const override;
  std::string name() const override { return "stub"; }
  int embed_dim() const override { return embed_dim_; }

 private:
  int embed_dim_;
  std::uint64_t seed_;
};

// ViT-S/14-geometry transformer: 14x14 patch embedding, class token,
// interpolated position embeddings, pre-norm blocks (MHA + GELU MLP). Token
// grids are tapped after blocks {3,6,9,12} (1-indexed), before the final
// norm. Weights load from a BlobFile container; see tools/export_vit_weights.py
// for converting a pretrained checkpoint.
template <typename T>
class VitTokenProvider : public TokenProvider<T> {
 public:
  explicit VitTokenProvider(const std::string& weights_path);
  TokenSet<T> extract(const Tensor<T>& rgb) const override;
  std::uint64_t fingerprint() const override { return fingerprint_; }
  std::string name() const override { return "pretrained"; }
  int embed_dim() const override { return embed_dim_; }

  int depth() const { return static_cast<int>(blocks_.size()); }

 private:
  struct Block {
    Tensor<T> norm1_w, norm1_b;  // 1 x 1 x D
    Tensor<T> qkv_w, qkv_b;      // 1 x 3D x D, 1 x 1 x 3D
    Tensor<T> proj_w, proj_b;    // 1 x D x D, 1 x 1 x D
    Tensor<T> norm2_w, norm2_b;
    Tensor<T> fc1_w, fc1_b;      // 1 x 4D x D
    Tensor<T> fc2_w, fc2_b;      // 1 x D x 4D
  };

  int embed_dim_ = 0;
  int heads_ = 6;
  int pos_grid_ = 0;              // base position-embedding grid side
  Tensor<T> patch_w_;             // D x 3 x 14*14 (flattened patch rows)
  Tensor<T> patch_b_;             // 1 x 1 x D
  Tensor<T> cls_token_;           // 1 x 1 x D
  Tensor<T> pos_cls_;             // 1 x 1 x D
  Tensor<T> pos_grid_embed_;      // D x g x g
  std::vector<Block> blocks_;
  std::array<int, 4> taps_{3, 6, 9, 12};
  std::uint64_t fingerprint_ = 0;
};

// Builds the provider named by kind ("stub" | "pretrained").
template <typename T>
std::unique_ptr<TokenProvider<T>> make_token_provider(
    const std::string& kind, int embed_dim, std::uint64_t seed,
    const std::string& weights_path);

}  // namespace naima
