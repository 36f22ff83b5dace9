#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "naima/rng.hpp"
#include "naima/tensor.hpp"

namespace naima {

// Box-Muller standard normal driven by the project RNG, so initialization is
// platform-reproducible.
inline double normal(Rng& rng) {
  double u1 = rng.next_unit();
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.28318530717958647692 * u2);
}

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, int c, int h, int w)
      : name(std::move(n)), value(c, h, w), grad(c, h, w) {}
};

// Layers cache what their backward pass needs during forward; training drives
// them from a single thread (forward -> backward -> optimizer step). Backward
// methods accumulate into parameter grads and, when requested, into the
// passed input-gradient tensor.

// 3x3 (or arbitrary odd k) zero-padded convolution, stride 1.
template <typename T>
class Conv2d {
 public:
  Conv2d(std::string name, int in_ch, int out_ch, int k);
  void init(Rng& rng, double stddev);
  void zero_weights();

  const Tensor<T>& forward(const Tensor<T>& x);
  void backward(const Tensor<T>& dy, Tensor<T>* dx);
  void collect(std::vector<Parameter<T>*>& out);

  Parameter<T> w;  // co x ci x k*k   (stored co, ci, k*k)
  Parameter<T> b;  // 1 x 1 x co
  int in_ch() const { return ci_; }
  int out_ch() const { return co_; }

 private:
  int ci_, co_, k_;
  Tensor<T> x_, y_;
};

template <typename T>
class Relu {
 public:
  const Tensor<T>& forward(const Tensor<T>& x);
  void backward(const Tensor<T>& dy, Tensor<T>& dx);  // accumulates

 private:
  Tensor<T> x_, y_;
};

// Global-average-pool -> bottleneck FC pair -> sigmoid -> channel-wise gate.
template <typename T>
class ChannelAttention {
 public:
  ChannelAttention(const std::string& name, int channels, int reduction);
  const Tensor<T>& forward(const Tensor<T>& u);
  void backward(const Tensor<T>& dy, Tensor<T>& du);  // accumulates into du
  void collect(std::vector<Parameter<T>*>& out);
  void init(Rng& rng);
  const Tensor<T>& gate() const { return g_; }

 private:
  Conv2d<T> fc1_, fc2_;
  Relu<T> relu_;
  Tensor<T> u_, z_, g_, y_;
};

// Residual channel attention block: x + CA(conv(relu(conv(x)))).
template <typename T>
class Rcab {
 public:
  Rcab(const std::string& name, int channels, int reduction);
  void init(Rng& rng);
  void zero_residual();  // zeroes the closing conv => block becomes identity
  const Tensor<T>& forward(const Tensor<T>& x);
  void backward(const Tensor<T>& dy, Tensor<T>& dx);  // accumulates
  void collect(std::vector<Parameter<T>*>& out);
  const ChannelAttention<T>& attention() const { return ca_; }

 private:
  Conv2d<T> conv1_, conv2_;
  Relu<T> relu_;
  ChannelAttention<T> ca_;
  Tensor<T> y_;
};

// Plain residual block (no channel attention): x + conv(relu(conv(x))).
template <typename T>
class ResBlock {
 public:
  ResBlock(const std::string& name, int channels);
  void init(Rng& rng);
  void zero_residual();
  const Tensor<T>& forward(const Tensor<T>& x);
  void backward(const Tensor<T>& dy, Tensor<T>& dx);
  void collect(std::vector<Parameter<T>*>& out);

 private:
  Conv2d<T> conv1_, conv2_;
  Relu<T> relu_;
  Tensor<T> y_;
};

// One level of the depth encoder: a stack of RCABs.
template <typename T>
class RcabStack {
 public:
  RcabStack(const std::string& name, int channels, int count, int reduction);
  void init(Rng& rng);
  void zero_residual();
  const Tensor<T>& forward(const Tensor<T>& x);
  void backward(const Tensor<T>& dy, Tensor<T>& dx);
  void collect(std::vector<Parameter<T>*>& out);

 private:
  std::vector<Rcab<T>> blocks_;
};

// RGB feature encoder: stem conv, then residual blocks shared as a trunk with
// one tap per level (level i continues from level i-1's features).
template <typename T>
class RgbEncoder {
 public:
  RgbEncoder(const std::string& name, int channels, int levels,
             int blocks_per_level);
  void init(Rng& rng);
  void zero_residual();
  // returns the per-level taps R*_1..R*_levels
  std::vector<Tensor<T>> forward(const Tensor<T>& rgb);
  void backward(const std::vector<Tensor<T>>& dtaps);
  void collect(std::vector<Parameter<T>*>& out);

 private:
  Conv2d<T> stem_;
  std::vector<std::vector<ResBlock<T>>> levels_;
};

// Reconstruction head: conv -> RCABs -> conv to one channel, plus the
// upsampled-depth skip. Working grid is already high resolution, so no
// spatial change happens here.
template <typename T>
class UpsampleHead {
 public:
  UpsampleHead(const std::string& name, int channels, int rcabs, int reduction);
  void init(Rng& rng);
  void zero_residual();  // zeroes the 1-channel projection => head emits 0
  // y = proj(rcabs(pre(d4))) + d_up
  const Tensor<T>& forward(const Tensor<T>& d4, const Tensor<T>& d_up);
  void backward(const Tensor<T>& dy, Tensor<T>& dd4);
  void collect(std::vector<Parameter<T>*>& out);

 private:
  Conv2d<T> pre_, proj_;
  std::vector<Rcab<T>> rcabs_;
  Tensor<T> y_;
};

}  // namespace naima
