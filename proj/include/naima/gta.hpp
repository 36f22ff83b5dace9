#pragma once

#include <memory>
#include <string>
#include <vector>

#include "naima/blocks.hpp"
#include "naima/config.hpp"
#include "naima/serialize.hpp"
#include "naima/tensor.hpp"
#include "naima/tokens.hpp"

namespace naima {

// Pixel-shuffle (r=2) then bilinear resize to the working grid. Parameter-free.
template <typename T>
class TokenAlign {
 public:
  explicit TokenAlign(int r) : r_(r) {}
  Tensor<T> forward(const Tensor<T>& s, int target_h, int target_w);
  Tensor<T> backward(const Tensor<T>& df);  // -> gradient w.r.t. s
  int r() const { return r_; }

 private:
  int r_;
  int sc_ = 0, sh_ = 0, sw_ = 0;  // cached source dims
};

// Gated single-head cross-attention: queries from depth features, keys and
// values from aligned token features; the attended result is added back
// through the learnable per-level scalar gate.
//   D* = E + alpha * unflatten(softmax(Q K^T / sqrt(d_k)) V)
// raw_qkv drops the learned projections and uses E/F directly (requires
// d_k == channels).
template <typename T>
class CrossAttention {
 public:
  CrossAttention(const std::string& name, int channels, int d_k,
                 double alpha_init, bool raw_qkv, int max_n);
  void init(Rng& rng);
  // store_attn keeps the N x N post-softmax matrix (required for backward)
  Tensor<T> forward(const Tensor<T>& e, const Tensor<T>& f, bool store_attn);
  void backward(const Tensor<T>& dout, Tensor<T>& de, Tensor<T>& df);
  void collect(std::vector<Parameter<T>*>& out);

  Parameter<T>& alpha() { return alpha_; }
  const Tensor<T>& attention_matrix() const;  // valid after store_attn forward
  void release_cache();

 private:
  int channels_, d_k_, max_n_;
  bool raw_qkv_;
  Parameter<T> wq_, wk_, wv_;  // 1 x d_k x C, 1 x d_k x C, 1 x C x C
  Parameter<T> alpha_;         // 1 x 1 x 1
  Tensor<T> e_, f_, q_, kt_, vt_, attn_, yt_;
  bool has_attn_ = false;
};

// Simplified symmetric fusion: concat -> 1x1 conv -> RCAB -> residual add.
template <typename T>
class FuseRgb {
 public:
  FuseRgb(const std::string& name, int channels, int reduction);
  void init(Rng& rng);
  void zero_residual();  // zeroes the 1x1 mixing conv (and the RCAB branch)
  Tensor<T> forward(const Tensor<T>& dstar, const Tensor<T>& r);
  void backward(const Tensor<T>& dout, Tensor<T>& ddstar, Tensor<T>& dr);
  void collect(std::vector<Parameter<T>*>& out);

 private:
  Conv2d<T> mix_;
  Rcab<T> rcab_;
  int channels_;
  Tensor<T> dstar_;
};

// Captured intermediate features from one forward pass, for figures/tests.
template <typename T>
struct ForwardTrace {
  Tensor<T> d_up;                    // bicubic skip, working grid
  Tensor<T> d0;                      // stem features
  std::vector<Tensor<T>> e;          // E_i
  std::vector<Tensor<T>> f;          // F_i
  std::vector<Tensor<T>> dstar;      // D*_i
  std::vector<Tensor<T>> d;          // D_i
  std::vector<Tensor<T>> rgb_taps;   // R*_i
};

// The full four-level pipeline (token extraction -> iterative depth encoding
// with semantic injection and RGB fusion -> reconstruction head with bicubic
// skip). Owns its frozen token provider; provider weights are structurally
// unreachable by the optimizer.
template <typename T>
class NaimaModel {
 public:
  explicit NaimaModel(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  TokenProvider<T>& provider() { return *provider_; }

  // rgb: 3 x H x W (normalized), d_lr: 1 x H/s x W/s (normalized)
  Tensor<T> forward(const Tensor<T>& rgb, const Tensor<T>& d_lr, bool training,
                    ForwardTrace<T>* trace = nullptr);
  // variant taking the already upsampled depth (the evaluator pads this)
  Tensor<T> forward_hr(const Tensor<T>& rgb, const Tensor<T>& d_up,
                       bool training, ForwardTrace<T>* trace = nullptr);
  void backward(const Tensor<T>& dpred);

  std::vector<Parameter<T>*> params();
  void zero_grads();
  void init_params();             // seeded by cfg.init_seed
  void zero_residual_branches();  // makes the net the identity around its stem

  void save_params(BlobFile& bf) const;
  void load_params(const BlobFile& bf);
  void write_arch(BlobFile& bf) const;
  // throws Error when the container's architecture row does not match cfg
  static void check_arch(const BlobFile& bf, const ModelConfig& cfg);

 private:
  ModelConfig cfg_;
  std::unique_ptr<TokenProvider<T>> provider_;
  Conv2d<T> stem_;
  std::vector<RcabStack<T>> enc_;
  std::vector<Conv2d<T>> proj_;
  std::vector<TokenAlign<T>> align_;
  std::vector<CrossAttention<T>> attn_;
  std::vector<FuseRgb<T>> fuse_;
  RgbEncoder<T> rgb_;
  UpsampleHead<T> head_;
  bool have_forward_ = false;
};

}  // namespace naima
