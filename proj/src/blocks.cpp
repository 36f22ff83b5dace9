#include "naima/blocks.hpp"

#include "naima/error.hpp"
#include "naima/kernels.hpp"

namespace naima {

// ----------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_ch, int out_ch, int k)
    : w(name + ".w", out_ch, in_ch, k * k),
      b(name + ".b", 1, 1, out_ch),
      ci_(in_ch), co_(out_ch), k_(k) {
  if (k % 2 == 0) throw ShapeError("conv kernel must be odd");
}

template <typename T>
void Conv2d<T>::init(Rng& rng, double stddev) {
  for (std::size_t i = 0; i < w.value.size(); ++i)
    w.value.data()[i] = static_cast<T>(stddev * normal(rng));
  b.value.zero();
}

template <typename T>
void Conv2d<T>::zero_weights() {
  w.value.zero();
  b.value.zero();
}

template <typename T>
const Tensor<T>& Conv2d<T>::forward(const Tensor<T>& x) {
  if (x.channels() != ci_)
    throw ShapeError(w.name + ": input channels " + std::to_string(x.channels()) +
                     ", expected " + std::to_string(ci_));
  x_ = x;
  y_ = Tensor<T>(co_, x.height(), x.width());
  kernels::conv2d_forward(x.data(), ci_, x.height(), x.width(), w.value.data(),
                          b.value.data(), co_, k_, y_.data());
  return y_;
}

template <typename T>
void Conv2d<T>::backward(const Tensor<T>& dy, Tensor<T>* dx) {
  kernels::conv2d_backward_params(x_.data(), dy.data(), ci_, x_.height(),
                                  x_.width(), co_, k_, w.grad.data(),
                                  b.grad.data());
  if (dx)
    kernels::conv2d_backward_input(w.value.data(), dy.data(), ci_, x_.height(),
                                   x_.width(), co_, k_, dx->data());
}

template <typename T>
void Conv2d<T>::collect(std::vector<Parameter<T>*>& out) {
  out.push_back(&w);
  out.push_back(&b);
}

// ------------------------------------------------------------------- Relu

template <typename T>
const Tensor<T>& Relu<T>::forward(const Tensor<T>& x) {
  x_ = x;
  y_ = Tensor<T>(x.channels(), x.height(), x.width());
  kernels::relu_forward(x.data(), y_.data(), x.size());
  return y_;
}

template <typename T>
void Relu<T>::backward(const Tensor<T>& dy, Tensor<T>& dx) {
  kernels::relu_backward(x_.data(), dy.data(), dx.data(), x_.size());
}

// -------------------------------------------------------- ChannelAttention

template <typename T>
ChannelAttention<T>::ChannelAttention(const std::string& name, int channels,
                                      int reduction)
    : fc1_(name + ".fc1", channels, channels / reduction, 1),
      fc2_(name + ".fc2", channels / reduction, channels, 1) {
  if (channels % reduction != 0)
    throw ShapeError(name + ": channels must be divisible by reduction");
}

template <typename T>
void ChannelAttention<T>::init(Rng& rng) {
  fc1_.init(rng, std::sqrt(2.0 / fc1_.in_ch()));
  fc2_.init(rng, std::sqrt(2.0 / fc2_.in_ch()));
}

template <typename T>
const Tensor<T>& ChannelAttention<T>::forward(const Tensor<T>& u) {
  u_ = u;
  const int c = u.channels();
  z_ = Tensor<T>(c, 1, 1);
  kernels::channel_mean(u.data(), c, u.height(), u.width(), z_.data());
  const Tensor<T>& a2 = fc2_.forward(relu_.forward(fc1_.forward(z_)));
  g_ = Tensor<T>(c, 1, 1);
  kernels::sigmoid_forward(a2.data(), g_.data(), a2.size());
  y_ = Tensor<T>(c, u.height(), u.width());
  const std::size_t plane = static_cast<std::size_t>(u.height()) * u.width();
  for (int ch = 0; ch < c; ++ch) {
    const T g = g_.data()[ch];
    const T* src = u.plane(ch);
    T* dst = y_.plane(ch);
    for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * g;
  }
  return y_;
}

template <typename T>
void ChannelAttention<T>::backward(const Tensor<T>& dy, Tensor<T>& du) {
  const int c = u_.channels();
  const std::size_t plane = static_cast<std::size_t>(u_.height()) * u_.width();
  Tensor<T> dg(c, 1, 1);
  for (int ch = 0; ch < c; ++ch) {
    const T g = g_.data()[ch];
    const T* dyp = dy.plane(ch);
    const T* up = u_.plane(ch);
    T* dup = du.plane(ch);
    T acc = 0;
    for (std::size_t i = 0; i < plane; ++i) {
      dup[i] += dyp[i] * g;
      acc += dyp[i] * up[i];
    }
    dg.data()[ch] = acc;
  }
  // through the sigmoid
  Tensor<T> da2(c, 1, 1);
  for (int ch = 0; ch < c; ++ch) {
    const T g = g_.data()[ch];
    da2.data()[ch] = dg.data()[ch] * g * (T(1) - g);
  }
  Tensor<T> dr(fc1_.out_ch(), 1, 1);
  fc2_.backward(da2, &dr);
  Tensor<T> da1(fc1_.out_ch(), 1, 1);
  relu_.backward(dr, da1);
  Tensor<T> dz(c, 1, 1);
  fc1_.backward(da1, &dz);
  kernels::channel_mean_backward(dz.data(), c, u_.height(), u_.width(), du.data());
}

template <typename T>
void ChannelAttention<T>::collect(std::vector<Parameter<T>*>& out) {
  fc1_.collect(out);
  fc2_.collect(out);
}

// ------------------------------------------------------------------- Rcab

template <typename T>
Rcab<T>::Rcab(const std::string& name, int channels, int reduction)
    : conv1_(name + ".conv1", channels, channels, 3),
      conv2_(name + ".conv2", channels, channels, 3),
      ca_(name + ".ca", channels, reduction) {}

template <typename T>
void Rcab<T>::init(Rng& rng) {
  conv1_.init(rng, std::sqrt(2.0 / (conv1_.in_ch() * 9)));
  // Damped closing conv keeps the deep residual trunk near-identity at init
  // so early losses start at the skip connection's level.
  conv2_.init(rng, 0.1 * std::sqrt(2.0 / (conv2_.in_ch() * 9)));
  ca_.init(rng);
}

template <typename T>
void Rcab<T>::zero_residual() {
  conv2_.zero_weights();
}

template <typename T>
const Tensor<T>& Rcab<T>::forward(const Tensor<T>& x) {
  const Tensor<T>& u = conv2_.forward(relu_.forward(conv1_.forward(x)));
  const Tensor<T>& br = ca_.forward(u);
  y_ = x;
  kernels::axpy(T(1), br.data(), y_.data(), y_.size());
  return y_;
}

template <typename T>
void Rcab<T>::backward(const Tensor<T>& dy, Tensor<T>& dx) {
  kernels::axpy(T(1), dy.data(), dx.data(), dx.size());  // residual path
  Tensor<T> du(dy.channels(), dy.height(), dy.width());
  ca_.backward(dy, du);
  Tensor<T> dr(dy.channels(), dy.height(), dy.width());
  conv2_.backward(du, &dr);
  Tensor<T> da(dy.channels(), dy.height(), dy.width());
  relu_.backward(dr, da);
  conv1_.backward(da, &dx);
}

template <typename T>
void Rcab<T>::collect(std::vector<Parameter<T>*>& out) {
  conv1_.collect(out);
  conv2_.collect(out);
  ca_.collect(out);
}

// --------------------------------------------------------------- ResBlock

template <typename T>
ResBlock<T>::ResBlock(const std::string& name, int channels)
    : conv1_(name + ".conv1", channels, channels, 3),
      conv2_(name + ".conv2", channels, channels, 3) {}

template <typename T>
void ResBlock<T>::init(Rng& rng) {
  conv1_.init(rng, std::sqrt(2.0 / (conv1_.in_ch() * 9)));
  conv2_.init(rng, 0.1 * std::sqrt(2.0 / (conv2_.in_ch() * 9)));  // damped, see Rcab
}

template <typename T>
void ResBlock<T>::zero_residual() {
  conv2_.zero_weights();
}

template <typename T>
const Tensor<T>& ResBlock<T>::forward(const Tensor<T>& x) {
  const Tensor<T>& u = conv2_.forward(relu_.forward(conv1_.forward(x)));
  y_ = x;
  kernels::axpy(T(1), u.data(), y_.data(), y_.size());
  return y_;
}

template <typename T>
void ResBlock<T>::backward(const Tensor<T>& dy, Tensor<T>& dx) {
  kernels::axpy(T(1), dy.data(), dx.data(), dx.size());
  Tensor<T> dr(dy.channels(), dy.height(), dy.width());
  conv2_.backward(dy, &dr);
  Tensor<T> da(dy.channels(), dy.height(), dy.width());
  relu_.backward(dr, da);
  conv1_.backward(da, &dx);
}

template <typename T>
void ResBlock<T>::collect(std::vector<Parameter<T>*>& out) {
  conv1_.collect(out);
  conv2_.collect(out);
}

// -------------------------------------------------------------- RcabStack

template <typename T>
RcabStack<T>::RcabStack(const std::string& name, int channels, int count,
                        int reduction) {
  blocks_.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    blocks_.emplace_back(name + ".rcab" + std::to_string(i), channels, reduction);
}

template <typename T>
void RcabStack<T>::init(Rng& rng) {
  for (auto& b : blocks_) b.init(rng);
}

template <typename T>
void RcabStack<T>::zero_residual() {
  for (auto& b : blocks_) b.zero_residual();
}

template <typename T>
const Tensor<T>& RcabStack<T>::forward(const Tensor<T>& x) {
  const Tensor<T>* cur = &x;
  for (auto& b : blocks_) cur = &b.forward(*cur);
  return *cur;
}

template <typename T>
void RcabStack<T>::backward(const Tensor<T>& dy, Tensor<T>& dx) {
  // chain backwards through the stack with a ping-pong buffer
  Tensor<T> cur = dy;
  for (std::size_t i = blocks_.size(); i-- > 1;) {
    Tensor<T> prev(dy.channels(), dy.height(), dy.width());
    blocks_[i].backward(cur, prev);
    cur = std::move(prev);
  }
  blocks_[0].backward(cur, dx);
}

template <typename T>
void RcabStack<T>::collect(std::vector<Parameter<T>*>& out) {
  for (auto& b : blocks_) b.collect(out);
}

// ------------------------------------------------------------- RgbEncoder

template <typename T>
RgbEncoder<T>::RgbEncoder(const std::string& name, int channels, int levels,
                          int blocks_per_level)
    : stem_(name + ".stem", 3, channels, 3) {
  levels_.resize(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l)
    for (int i = 0; i < blocks_per_level; ++i)
      levels_[l].emplace_back(
          name + ".level" + std::to_string(l + 1) + ".res" + std::to_string(i),
          channels);
}

template <typename T>
void RgbEncoder<T>::init(Rng& rng) {
  stem_.init(rng, std::sqrt(2.0 / (3 * 9)));
  for (auto& lv : levels_)
    for (auto& b : lv) b.init(rng);
}

template <typename T>
void RgbEncoder<T>::zero_residual() {
  for (auto& lv : levels_)
    for (auto& b : lv) b.zero_residual();
}

template <typename T>
std::vector<Tensor<T>> RgbEncoder<T>::forward(const Tensor<T>& rgb) {
  std::vector<Tensor<T>> taps;
  taps.reserve(levels_.size());
  const Tensor<T>* cur = &stem_.forward(rgb);
  for (auto& lv : levels_) {
    for (auto& b : lv) cur = &b.forward(*cur);
    Tensor<T> tap = *cur;
    tap.role = Role::rgb_features;
    taps.push_back(std::move(tap));
  }
  return taps;
}

template <typename T>
void RgbEncoder<T>::backward(const std::vector<Tensor<T>>& dtaps) {
  if (dtaps.size() != levels_.size())
    throw ShapeError("rgb encoder: wrong tap gradient count");
  // deepest level first; each level's gradient joins the trunk flow
  Tensor<T> cur = dtaps.back();
  for (std::size_t l = levels_.size(); l-- > 0;) {
    auto& lv = levels_[l];
    for (std::size_t i = lv.size(); i-- > 0;) {
      Tensor<T> prev(cur.channels(), cur.height(), cur.width());
      lv[i].backward(cur, prev);
      cur = std::move(prev);
    }
    if (l > 0) kernels::axpy(T(1), dtaps[l - 1].data(), cur.data(), cur.size());
  }
  stem_.backward(cur, nullptr);  // no gradient needed for the input image
}

template <typename T>
void RgbEncoder<T>::collect(std::vector<Parameter<T>*>& out) {
  stem_.collect(out);
  for (auto& lv : levels_)
    for (auto& b : lv) b.collect(out);
}

// ----------------------------------------------------------- UpsampleHead

template <typename T>
UpsampleHead<T>::UpsampleHead(const std::string& name, int channels, int rcabs,
                              int reduction)
    : pre_(name + ".pre", channels, channels, 3),
      proj_(name + ".proj", channels, 1, 3) {
  rcabs_.reserve(static_cast<std::size_t>(rcabs));
  for (int i = 0; i < rcabs; ++i)
    rcabs_.emplace_back(name + ".rcab" + std::to_string(i), channels, reduction);
}

template <typename T>
void UpsampleHead<T>::init(Rng& rng) {
  pre_.init(rng, std::sqrt(2.0 / (pre_.in_ch() * 9)));
  for (auto& r : rcabs_) r.init(rng);
  // damped: the head's whole output is a residual on the bicubic skip
  proj_.init(rng, 0.1 * std::sqrt(2.0 / (proj_.in_ch() * 9)));
}

template <typename T>
void UpsampleHead<T>::zero_residual() {
  for (auto& r : rcabs_) r.zero_residual();
  proj_.zero_weights();
}

template <typename T>
const Tensor<T>& UpsampleHead<T>::forward(const Tensor<T>& d4,
                                          const Tensor<T>& d_up) {
  const Tensor<T>* cur = &pre_.forward(d4);
  for (auto& r : rcabs_) cur = &r.forward(*cur);
  const Tensor<T>& phi = proj_.forward(*cur);
  if (!phi.same_shape(d_up))
    throw ShapeError("head output " + phi.shape_str() +
                     " vs upsampled depth " + d_up.shape_str());
  y_ = d_up;
  kernels::axpy(T(1), phi.data(), y_.data(), y_.size());
  y_.role = Role::depth_hr;
  return y_;
}

template <typename T>
void UpsampleHead<T>::backward(const Tensor<T>& dy, Tensor<T>& dd4) {
  Tensor<T> dcur(dd4.channels(), dd4.height(), dd4.width());
  proj_.backward(dy, &dcur);
  for (std::size_t i = rcabs_.size(); i-- > 0;) {
    Tensor<T> prev(dcur.channels(), dcur.height(), dcur.width());
    rcabs_[i].backward(dcur, prev);
    dcur = std::move(prev);
  }
  pre_.backward(dcur, &dd4);
}

template <typename T>
void UpsampleHead<T>::collect(std::vector<Parameter<T>*>& out) {
  pre_.collect(out);
  for (auto& r : rcabs_) r.collect(out);
  proj_.collect(out);
}

#define NAIMA_INSTANTIATE_BLOCKS(T) \
  template class Conv2d<T>;         \
  template class Relu<T>;           \
  template class ChannelAttention<T>; \
  template class Rcab<T>;           \
  template class ResBlock<T>;       \
  template class RcabStack<T>;      \
  template class RgbEncoder<T>;     \
  template class UpsampleHead<T>;

NAIMA_INSTANTIATE_BLOCKS(float)
NAIMA_INSTANTIATE_BLOCKS(double)

}  // namespace naima
