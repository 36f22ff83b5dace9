#include "naima/bicubic.hpp"

#include <cmath>
#include <vector>

#include "naima/error.hpp"

namespace naima {

namespace {

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return a * (((x - 5.0) * x + 8.0) * x - 4.0);
  return 0.0;
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int m = 2 * (n - 1);
  i = ((i % m) + m) % m;
  return i < n ? i : m - i;
}

struct Taps {
  std::vector<int> idx;      // ntaps per output coordinate
  std::vector<double> wgt;
  int ntaps = 0;
};

// One axis: out coordinate oy samples input around (oy + 0.5) * ratio - 0.5.
// ratio > 1 (downscale) stretches the kernel support by ratio.
Taps make_taps(int in_n, int out_n) {
  const double ratio = static_cast<double>(in_n) / out_n;
  const double stretch = std::max(ratio, 1.0);
  const double radius = 2.0 * stretch;
  Taps t;
  t.ntaps = static_cast<int>(std::ceil(radius * 2.0)) + 1;
  t.idx.resize(static_cast<std::size_t>(out_n) * t.ntaps);
  t.wgt.resize(static_cast<std::size_t>(out_n) * t.ntaps);
  for (int o = 0; o < out_n; ++o) {
    const double center = (o + 0.5) * ratio - 0.5;
    const int first = static_cast<int>(std::floor(center - radius)) + 1;
    double sum = 0.0;
    for (int k = 0; k < t.ntaps; ++k) {
      const double wv = cubic_kernel((center - (first + k)) / stretch);
      t.wgt[static_cast<std::size_t>(o) * t.ntaps + k] = wv;
      t.idx[static_cast<std::size_t>(o) * t.ntaps + k] = reflect_index(first + k, in_n);
      sum += wv;
    }
    const double inv = 1.0 / sum;
    for (int k = 0; k < t.ntaps; ++k)
      t.wgt[static_cast<std::size_t>(o) * t.ntaps + k] *= inv;
  }
  return t;
}

}  // namespace

template <typename T>
Tensor<T> bicubic_resize(const Tensor<T>& in, int oh, int ow) {
  if (oh <= 0 || ow <= 0) throw ShapeError("bicubic_resize: target dims must be positive");
  const int c = in.channels(), h = in.height(), w = in.width();
  const Taps tx = make_taps(w, ow);
  const Taps ty = make_taps(h, oh);
  Tensor<T> out(c, oh, ow);
  out.role = in.role;
  std::vector<double> mid(static_cast<std::size_t>(h) * ow);
  for (int ch = 0; ch < c; ++ch) {
    const T* src = in.plane(ch);
    // horizontal pass
    for (int y = 0; y < h; ++y) {
      const T* row = src + static_cast<std::size_t>(y) * w;
      for (int ox = 0; ox < ow; ++ox) {
        const int* ix = &tx.idx[static_cast<std::size_t>(ox) * tx.ntaps];
        const double* wx = &tx.wgt[static_cast<std::size_t>(ox) * tx.ntaps];
        double acc = 0.0;
        for (int k = 0; k < tx.ntaps; ++k) acc += wx[k] * static_cast<double>(row[ix[k]]);
        mid[static_cast<std::size_t>(y) * ow + ox] = acc;
      }
    }
    // vertical pass
    T* dst = out.plane(ch);
    for (int oy = 0; oy < oh; ++oy) {
      const int* iy = &ty.idx[static_cast<std::size_t>(oy) * ty.ntaps];
      const double* wy = &ty.wgt[static_cast<std::size_t>(oy) * ty.ntaps];
      for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int k = 0; k < ty.ntaps; ++k)
          acc += wy[k] * mid[static_cast<std::size_t>(iy[k]) * ow + ox];
        dst[static_cast<std::size_t>(oy) * ow + ox] = static_cast<T>(acc);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> bicubic_downsample(const Tensor<T>& in, int scale) {
  if (scale < 2) throw ShapeError("bicubic_downsample: scale must be >= 2");
  if (in.height() % scale != 0 || in.width() % scale != 0)
    throw ShapeError("bicubic_downsample: dims " + in.shape_str() +
                     " not divisible by scale " + std::to_string(scale));
  return bicubic_resize(in, in.height() / scale, in.width() / scale);
}

template <typename T>
Tensor<T> bicubic_upsample(const Tensor<T>& in, int scale) {
  if (scale < 2) throw ShapeError("bicubic_upsample: scale must be >= 2");
  return bicubic_resize(in, in.height() * scale, in.width() * scale);
}

template Tensor<float> bicubic_resize(const Tensor<float>&, int, int);
template Tensor<double> bicubic_resize(const Tensor<double>&, int, int);
template Tensor<float> bicubic_downsample(const Tensor<float>&, int);
template Tensor<double> bicubic_downsample(const Tensor<double>&, int);
template Tensor<float> bicubic_upsample(const Tensor<float>&, int);
template Tensor<double> bicubic_upsample(const Tensor<double>&, int);

}  // namespace naima
