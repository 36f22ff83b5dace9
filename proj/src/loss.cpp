#include "naima/loss.hpp"

#include <cmath>
#include <cstdlib>

#include "naima/error.hpp"

namespace naima {

namespace {

template <typename T>
void check_pair(const Tensor<T>& pred, const Tensor<T>& gt) {
  if (!pred.same_shape(gt))
    throw ShapeError("loss inputs differ in shape: " + pred.shape_str() +
                     " vs " + gt.shape_str());
}

template <typename T>
double sgn(T x) {
  return x > T(0) ? 1.0 : (x < T(0) ? -1.0 : 0.0);
}

}  // namespace

template <typename T>
void spatial_gradients(const Tensor<T>& d, Tensor<T>& gx, Tensor<T>& gy) {
  if (d.height() < 2 || d.width() < 2)
    throw ShapeError("spatial gradients need at least a 2x2 map, got " +
                     d.shape_str());
  gx = Tensor<T>(d.channels(), d.height(), d.width());
  gy = Tensor<T>(d.channels(), d.height(), d.width());
  const int h = d.height(), w = d.width();
  for (int c = 0; c < d.channels(); ++c) {
    const T* p = d.plane(c);
    T* px = gx.plane(c);
    T* py = gy.plane(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w - 1; ++x) px[y * w + x] = p[y * w + x + 1] - p[y * w + x];
      px[y * w + w - 1] = T(0);
    }
    for (int y = 0; y < h - 1; ++y)
      for (int x = 0; x < w; ++x) py[y * w + x] = p[(y + 1) * w + x] - p[y * w + x];
    for (int x = 0; x < w; ++x) py[(h - 1) * w + x] = T(0);
  }
}

template <typename T>
T l1_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
  check_pair(pred, gt);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    acc += std::abs(static_cast<double>(pred.data()[i]) -
                    static_cast<double>(gt.data()[i]));
  return static_cast<T>(acc / static_cast<double>(pred.size()));
}

template <typename T>
T gradient_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
  check_pair(pred, gt);
  Tensor<T> gxp, gyp, gxg, gyg;
  spatial_gradients(pred, gxp, gyp);
  spatial_gradients(gt, gxg, gyg);
  return l1_loss(gxp, gxg) + l1_loss(gyp, gyg);
}

template <typename T>
LossParts total_loss(const Tensor<T>& pred, const Tensor<T>& gt,
                     const LossConfig& cfg) {
  LossParts parts;
  parts.l1 = static_cast<double>(l1_loss(pred, gt));
  parts.grad = cfg.lambda != 0.0 ? static_cast<double>(gradient_loss(pred, gt))
                                 : 0.0;
  parts.total = parts.l1 + cfg.lambda * parts.grad;
  return parts;
}

template <typename T>
LossParts total_loss_backward(const Tensor<T>& pred, const Tensor<T>& gt,
                              const LossConfig& cfg, Tensor<T>& dpred) {
  check_pair(pred, gt);
  if (!dpred.same_shape(pred)) dpred = Tensor<T>(pred.channels(), pred.height(), pred.width());
  dpred.zero();
  const double invn = 1.0 / static_cast<double>(pred.size());

  for (std::size_t i = 0; i < pred.size(); ++i)
    dpred.data()[i] = static_cast<T>(sgn(pred.data()[i] - gt.data()[i]) * invn);

  LossParts parts = total_loss(pred, gt, cfg);
  if (cfg.lambda != 0.0) {
    const int h = pred.height(), w = pred.width();
    const double lam = cfg.lambda * invn;
    for (int c = 0; c < pred.channels(); ++c) {
      const T* p = pred.plane(c);
      const T* g = gt.plane(c);
      T* dp = dpred.plane(c);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w - 1; ++x) {
          const double t =
              lam * sgn((p[y * w + x + 1] - p[y * w + x]) -
                        (g[y * w + x + 1] - g[y * w + x]));
          dp[y * w + x + 1] += static_cast<T>(t);
          dp[y * w + x] -= static_cast<T>(t);
        }
      }
      for (int y = 0; y < h - 1; ++y) {
        for (int x = 0; x < w; ++x) {
          const double t =
              lam * sgn((p[(y + 1) * w + x] - p[y * w + x]) -
                        (g[(y + 1) * w + x] - g[y * w + x]));
          dp[(y + 1) * w + x] += static_cast<T>(t);
          dp[y * w + x] -= static_cast<T>(t);
        }
      }
    }
  }
  return parts;
}

#define NAIMA_INSTANTIATE_LOSS(T)                                             \
  template void spatial_gradients<T>(const Tensor<T>&, Tensor<T>&, Tensor<T>&); \
  template T l1_loss<T>(const Tensor<T>&, const Tensor<T>&);                  \
  template T gradient_loss<T>(const Tensor<T>&, const Tensor<T>&);            \
  template LossParts total_loss<T>(const Tensor<T>&, const Tensor<T>&,        \
                                   const LossConfig&);                        \
  template LossParts total_loss_backward<T>(const Tensor<T>&, const Tensor<T>&, \
                                            const LossConfig&, Tensor<T>&);

NAIMA_INSTANTIATE_LOSS(float)
NAIMA_INSTANTIATE_LOSS(double)

#undef NAIMA_INSTANTIATE_LOSS

}  // namespace naima
