#include "naima/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

// Serial reference kernels. Plain loops, naive accumulation order, std::exp.
// These stay deliberately simple; the optimized backend in kernels_omp.cpp is
// checked against them.

namespace naima::kernels::ref {

template <typename T>
void exp_array(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
T sum(const T* a, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

template <typename T>
T sum_abs(const T* a, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i]);
  return s;
}

template <typename T>
T max_value(const T* a, std::size_t n) {
  T m = a[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, a[i]);
  return m;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void scale(T alpha, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > T(0)) dx[i] += dy[i];
}

template <typename T>
void sigmoid_forward(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

template <typename T>
void conv2d_forward(const T* in, int ci, int h, int w, const T* weights,
                    const T* bias, int co, int k, T* out) {
  const int p = k / 2;
  for (int oc = 0; oc < co; ++oc) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        T acc = bias ? bias[oc] : T(0);
        for (int ic = 0; ic < ci; ++ic) {
          for (int dy = 0; dy < k; ++dy) {
            const int yy = y + dy - p;
            if (yy < 0 || yy >= h) continue;
            for (int dx = 0; dx < k; ++dx) {
              const int xx = x + dx - p;
              if (xx < 0 || xx >= w) continue;
              acc += weights[((static_cast<std::size_t>(oc) * ci + ic) * k + dy) * k + dx] *
                     in[(static_cast<std::size_t>(ic) * h + yy) * w + xx];
            }
          }
        }
        out[(static_cast<std::size_t>(oc) * h + y) * w + x] = acc;
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(const T* weights, const T* dout, int ci, int h,
                           int w, int co, int k, T* din) {
  const int p = k / 2;
  for (int oc = 0; oc < co; ++oc) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const T g = dout[(static_cast<std::size_t>(oc) * h + y) * w + x];
        for (int ic = 0; ic < ci; ++ic) {
          for (int dy = 0; dy < k; ++dy) {
            const int yy = y + dy - p;
            if (yy < 0 || yy >= h) continue;
            for (int dx = 0; dx < k; ++dx) {
              const int xx = x + dx - p;
              if (xx < 0 || xx >= w) continue;
              din[(static_cast<std::size_t>(ic) * h + yy) * w + xx] +=
                  g * weights[((static_cast<std::size_t>(oc) * ci + ic) * k + dy) * k + dx];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_params(const T* in, const T* dout, int ci, int h, int w,
                            int co, int k, T* dweights, T* dbias) {
  const int p = k / 2;
  for (int oc = 0; oc < co; ++oc) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const T g = dout[(static_cast<std::size_t>(oc) * h + y) * w + x];
        if (dbias) dbias[oc] += g;
        for (int ic = 0; ic < ci; ++ic) {
          for (int dy = 0; dy < k; ++dy) {
            const int yy = y + dy - p;
            if (yy < 0 || yy >= h) continue;
            for (int dx = 0; dx < k; ++dx) {
              const int xx = x + dx - p;
              if (xx < 0 || xx >= w) continue;
              dweights[((static_cast<std::size_t>(oc) * ci + ic) * k + dy) * k + dx] +=
                  g * in[(static_cast<std::size_t>(ic) * h + yy) * w + xx];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void gemm_nn(int m, int k, int n, const T* a, const T* b, T* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T s = 0;
      for (int l = 0; l < k; ++l) s += a[static_cast<std::size_t>(i) * k + l] * b[static_cast<std::size_t>(l) * n + j];
      c[static_cast<std::size_t>(i) * n + j] += s;
    }
}

template <typename T>
void gemm_nt(int m, int k, int n, const T* a, const T* b, T* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T s = 0;
      for (int l = 0; l < k; ++l) s += a[static_cast<std::size_t>(i) * k + l] * b[static_cast<std::size_t>(j) * k + l];
      c[static_cast<std::size_t>(i) * n + j] += s;
    }
}

template <typename T>
void gemm_tn(int m, int k, int n, const T* a, const T* b, T* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T s = 0;
      for (int l = 0; l < k; ++l) s += a[static_cast<std::size_t>(l) * m + i] * b[static_cast<std::size_t>(l) * n + j];
      c[static_cast<std::size_t>(i) * n + j] += s;
    }
}

template <typename T>
void transpose(const T* in, int rows, int cols, T* out) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out[static_cast<std::size_t>(j) * rows + i] = in[static_cast<std::size_t>(i) * cols + j];
}

template <typename T>
void softmax_rows(T* x, int m, int n) {
  for (int i = 0; i < m; ++i) {
    T* row = x + static_cast<std::size_t>(i) * n;
    T mx = max_value(row, n);
    T s = 0;
    for (int j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      s += row[j];
    }
    const T inv = T(1) / s;
    for (int j = 0; j < n; ++j) row[j] *= inv;
  }
}

template <typename T>
int attention_forward(const T* q, const T* kt, const T* vt, int n, int dk,
                      int cv, T* attn, T* y) {
  const T invsq = T(1) / std::sqrt(static_cast<T>(dk));
  std::vector<T> rowbuf(attn ? 0 : n);
  int bad_rows = 0;
  for (int i = 0; i < n; ++i) {
    T* a = attn ? attn + static_cast<std::size_t>(i) * n : rowbuf.data();
    for (int j = 0; j < n; ++j) {
      T s = 0;
      for (int l = 0; l < dk; ++l) s += q[static_cast<std::size_t>(i) * dk + l] * kt[static_cast<std::size_t>(l) * n + j];
      a[j] = s * invsq;
    }
    if (!std::isfinite(static_cast<double>(sum(a, n)))) {
      ++bad_rows;
      std::fill(y + static_cast<std::size_t>(i) * cv, y + static_cast<std::size_t>(i + 1) * cv, T(0));
      continue;
    }
    T mx = max_value(a, n);
    T s = 0;
    for (int j = 0; j < n; ++j) {
      a[j] = std::exp(a[j] - mx);
      s += a[j];
    }
    const T inv = T(1) / s;
    for (int j = 0; j < n; ++j) a[j] *= inv;
    for (int c = 0; c < cv; ++c) {
      T acc = 0;
      for (int j = 0; j < n; ++j) acc += a[j] * vt[static_cast<std::size_t>(c) * n + j];
      y[static_cast<std::size_t>(i) * cv + c] = acc;
    }
  }
  return bad_rows;
}

template <typename T>
void attention_backward(const T* q, const T* kt, const T* vt, const T* attn,
                        const T* dy, int n, int dk, int cv, T* dq, T* dkt,
                        T* dvt) {
  const T invsq = T(1) / std::sqrt(static_cast<T>(dk));
  std::vector<T> drow(n);
  for (int i = 0; i < n; ++i) {
    const T* a = attn + static_cast<std::size_t>(i) * n;
    // d(attention row) from dY
    for (int j = 0; j < n; ++j) {
      T s = 0;
      for (int c = 0; c < cv; ++c) s += dy[static_cast<std::size_t>(i) * cv + c] * vt[static_cast<std::size_t>(c) * n + j];
      drow[j] = s;
    }
    // dV^T accumulation
    for (int c = 0; c < cv; ++c) {
      const T g = dy[static_cast<std::size_t>(i) * cv + c];
      for (int j = 0; j < n; ++j) dvt[static_cast<std::size_t>(c) * n + j] += g * a[j];
    }
    // softmax backward, fold the 1/sqrt(dk) logit scale in
    T dotv = 0;
    for (int j = 0; j < n; ++j) dotv += a[j] * drow[j];
    for (int j = 0; j < n; ++j) drow[j] = invsq * a[j] * (drow[j] - dotv);
    for (int l = 0; l < dk; ++l) {
      T s = 0;
      for (int j = 0; j < n; ++j) s += drow[j] * kt[static_cast<std::size_t>(l) * n + j];
      dq[static_cast<std::size_t>(i) * dk + l] += s;
      const T qv = q[static_cast<std::size_t>(i) * dk + l];
      for (int j = 0; j < n; ++j) dkt[static_cast<std::size_t>(l) * n + j] += qv * drow[j];
    }
  }
}

template <typename T>
void bilinear_resize_forward(const T* in, int c, int h, int w, int oh, int ow,
                             T* out) {
  const double sy = static_cast<double>(h) / oh;
  const double sx = static_cast<double>(w) / ow;
  for (int ch = 0; ch < c; ++ch) {
    const T* src = in + static_cast<std::size_t>(ch) * h * w;
    T* dst = out + static_cast<std::size_t>(ch) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      double fy = (oy + 0.5) * sy - 0.5;
      int y0 = static_cast<int>(std::floor(fy));
      T wy = static_cast<T>(fy - y0);
      int y0c = std::clamp(y0, 0, h - 1);
      int y1c = std::clamp(y0 + 1, 0, h - 1);
      for (int ox = 0; ox < ow; ++ox) {
        double fx = (ox + 0.5) * sx - 0.5;
        int x0 = static_cast<int>(std::floor(fx));
        T wx = static_cast<T>(fx - x0);
        int x0c = std::clamp(x0, 0, w - 1);
        int x1c = std::clamp(x0 + 1, 0, w - 1);
        const T v00 = src[static_cast<std::size_t>(y0c) * w + x0c];
        const T v01 = src[static_cast<std::size_t>(y0c) * w + x1c];
        const T v10 = src[static_cast<std::size_t>(y1c) * w + x0c];
        const T v11 = src[static_cast<std::size_t>(y1c) * w + x1c];
        dst[static_cast<std::size_t>(oy) * ow + ox] =
            (T(1) - wy) * ((T(1) - wx) * v00 + wx * v01) +
            wy * ((T(1) - wx) * v10 + wx * v11);
      }
    }
  }
}

template <typename T>
void bilinear_resize_backward(const T* dout, int c, int h, int w, int oh,
                              int ow, T* din) {
  const double sy = static_cast<double>(h) / oh;
  const double sx = static_cast<double>(w) / ow;
  for (int ch = 0; ch < c; ++ch) {
    T* dst = din + static_cast<std::size_t>(ch) * h * w;
    const T* src = dout + static_cast<std::size_t>(ch) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      double fy = (oy + 0.5) * sy - 0.5;
      int y0 = static_cast<int>(std::floor(fy));
      T wy = static_cast<T>(fy - y0);
      int y0c = std::clamp(y0, 0, h - 1);
      int y1c = std::clamp(y0 + 1, 0, h - 1);
      for (int ox = 0; ox < ow; ++ox) {
        double fx = (ox + 0.5) * sx - 0.5;
        int x0 = static_cast<int>(std::floor(fx));
        T wx = static_cast<T>(fx - x0);
        int x0c = std::clamp(x0, 0, w - 1);
        int x1c = std::clamp(x0 + 1, 0, w - 1);
        const T g = src[static_cast<std::size_t>(oy) * ow + ox];
        dst[static_cast<std::size_t>(y0c) * w + x0c] += (T(1) - wy) * (T(1) - wx) * g;
        dst[static_cast<std::size_t>(y0c) * w + x1c] += (T(1) - wy) * wx * g;
        dst[static_cast<std::size_t>(y1c) * w + x0c] += wy * (T(1) - wx) * g;
        dst[static_cast<std::size_t>(y1c) * w + x1c] += wy * wx * g;
      }
    }
  }
}

template <typename T>
void pixel_shuffle_forward(const T* in, int c_out, int h, int w, int r,
                           T* out) {
  const int oh = h * r, ow = w * r;
  for (int c = 0; c < c_out; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx)
            out[(static_cast<std::size_t>(c) * oh + (y * r + dy)) * ow + (x * r + dx)] =
                in[(static_cast<std::size_t>(c * r * r + dy * r + dx) * h + y) * w + x];
}

template <typename T>
void pixel_shuffle_backward(const T* dout, int c_out, int h, int w, int r,
                            T* din) {
  const int oh = h * r, ow = w * r;
  for (int c = 0; c < c_out; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx)
            din[(static_cast<std::size_t>(c * r * r + dy * r + dx) * h + y) * w + x] +=
                dout[(static_cast<std::size_t>(c) * oh + (y * r + dy)) * ow + (x * r + dx)];
}

template <typename T>
void channel_mean(const T* in, int c, int h, int w, T* out) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int ch = 0; ch < c; ++ch) {
    T s = 0;
    for (std::size_t i = 0; i < plane; ++i) s += in[ch * plane + i];
    out[ch] = s / static_cast<T>(plane);
  }
}

template <typename T>
void channel_mean_backward(const T* dmean, int c, int h, int w, T* din) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int ch = 0; ch < c; ++ch) {
    const T g = dmean[ch] / static_cast<T>(plane);
    for (std::size_t i = 0; i < plane; ++i) din[ch * plane + i] += g;
  }
}

#define NAIMA_INSTANTIATE_REF(T)                                               \
  template void exp_array(const T*, T*, std::size_t);                         \
  template T dot(const T*, const T*, std::size_t);                            \
  template T sum(const T*, std::size_t);                                      \
  template T sum_abs(const T*, std::size_t);                                  \
  template T max_value(const T*, std::size_t);                                \
  template void axpy(T, const T*, T*, std::size_t);                           \
  template void scale(T, T*, std::size_t);                                    \
  template void relu_forward(const T*, T*, std::size_t);                      \
  template void relu_backward(const T*, const T*, T*, std::size_t);           \
  template void sigmoid_forward(const T*, T*, std::size_t);                   \
  template void conv2d_forward(const T*, int, int, int, const T*, const T*,   \
                               int, int, T*);                                 \
  template void conv2d_backward_input(const T*, const T*, int, int, int, int, \
                                      int, T*);                               \
  template void conv2d_backward_params(const T*, const T*, int, int, int,     \
                                       int, int, T*, T*);                     \
  template void gemm_nn(int, int, int, const T*, const T*, T*);               \
  template void gemm_nt(int, int, int, const T*, const T*, T*);               \
  template void gemm_tn(int, int, int, const T*, const T*, T*);               \
  template void transpose(const T*, int, int, T*);                            \
  template void softmax_rows(T*, int, int);                                   \
  template int attention_forward(const T*, const T*, const T*, int, int,     \
                                 int, T*, T*);                                \
  template void attention_backward(const T*, const T*, const T*, const T*,    \
                                   const T*, int, int, int, T*, T*, T*);      \
  template void bilinear_resize_forward(const T*, int, int, int, int, int,    \
                                        T*);                                  \
  template void bilinear_resize_backward(const T*, int, int, int, int, int,   \
                                         T*);                                 \
  template void pixel_shuffle_forward(const T*, int, int, int, int, T*);      \
  template void pixel_shuffle_backward(const T*, int, int, int, int, T*);     \
  template void channel_mean(const T*, int, int, int, T*);                    \
  template void channel_mean_backward(const T*, int, int, int, T*);

NAIMA_INSTANTIATE_REF(float)
NAIMA_INSTANTIATE_REF(double)

}  // namespace naima::kernels::ref
