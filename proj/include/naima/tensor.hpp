#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace naima {

// Role tag for feature maps flowing through the network. Purely informational;
// carried along so traces and emitted figures can name what they hold.
enum class Role {
  none,
  depth_encoding,    // E_i
  projected_tokens,  // S_i
  aligned_tokens,    // F_i
  injected_depth,    // D*_i
  rgb_features,      // R*_i
  refined_depth,     // D_i
  depth_hr,          // D_hr
};

inline const char* role_name(Role r) {
  switch (r) {
    case Role::depth_encoding: return "E";
    case Role::projected_tokens: return "S";
    case Role::aligned_tokens: return "F";
    case Role::injected_depth: return "D_star";
    case Role::rgb_features: return "R_star";
    case Role::refined_depth: return "D";
    case Role::depth_hr: return "D_hr";
    default: return "none";
  }
}

// Dense C x H x W grid, row-major within each channel plane.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, T fill = T(0))
      : c_(channels), h_(height), w_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {
    if (channels <= 0 || height <= 0 || width <= 0)
      throw std::invalid_argument("Tensor dims must be positive");
  }

  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* plane(int c) { return data_.data() + static_cast<std::size_t>(c) * h_ * w_; }
  const T* plane(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * h_ * w_;
  }

  T& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x];
  }
  T at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T(0)); }

  bool same_shape(const Tensor& o) const {
    return c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }
  std::string shape_str() const {
    return std::to_string(c_) + "x" + std::to_string(h_) + "x" + std::to_string(w_);
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(c_, h_, w_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out.data()[i] = static_cast<U>(data_[i]);
    out.role = role;
    return out;
  }

  Role role = Role::none;

 private:
  int c_ = 0, h_ = 0, w_ = 0;
  std::vector<T> data_;
};

template <typename T>
bool all_finite(const Tensor<T>& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(static_cast<double>(t.data()[i]))) return false;
  return true;
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace naima
