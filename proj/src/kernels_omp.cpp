#include "naima/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

// OpenMP backend. Outer loops parallelize over disjoint output slices and
// cross-row gradient reductions run through a fixed chunk count, so results
// are identical for any thread count. Inner loops carry omp simd; reductions
// are reassociated relative to the serial reference (agreement to roundoff).

namespace naima::kernels {

namespace {
constexpr int kReduceChunks = 8;
}

// ---------------------------------------------------------------- exp_array

template <>
void exp_array<double>(const double* x, double* y, std::size_t n) {
  // Cephes-style rational approximation, branch-free so the loop vectorizes.
  constexpr double kLog2e = 1.4426950408889634074;
  constexpr double kC1 = 6.93145751953125e-1;
  constexpr double kC2 = 1.42860682030941723212e-6;
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    double xx = x[i];
    xx = xx < -708.0 ? -708.0 : xx;
    xx = xx > 709.0 ? 709.0 : xx;
    const double nd = std::floor(kLog2e * xx + 0.5);
    const double r = (xx - nd * kC1) - nd * kC2;
    const double r2 = r * r;
    const double p =
        r * (9.99999999999999999910e-1 +
             r2 * (3.02994407707441961300e-2 + r2 * 1.26177193074810590878e-4));
    const double q =
        2.00000000000000000005e0 +
        r2 * (2.27265548208155028766e-1 +
              r2 * (2.52448340349684104192e-3 + r2 * 3.00198505138664455042e-6));
    const double e = 1.0 + 2.0 * p / (q - p);
    const std::int64_t ni = static_cast<std::int64_t>(nd);
    y[i] = e * std::bit_cast<double>((ni + 1023) << 52);
  }
}

template <>
void exp_array<float>(const float* x, float* y, std::size_t n) {
  constexpr float kLog2e = 1.44269504088896341f;
  constexpr float kC1 = 0.693359375f;
  constexpr float kC2 = -2.12194440e-4f;
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    float xx = x[i];
    xx = xx < -87.0f ? -87.0f : xx;
    xx = xx > 88.0f ? 88.0f : xx;
    const float nd = std::floor(kLog2e * xx + 0.5f);
    const float r = (xx - nd * kC1) - nd * kC2;
    float p = 1.9875691500e-4f;
    p = p * r + 1.3981999507e-3f;
    p = p * r + 8.3334519073e-3f;
    p = p * r + 4.1665795894e-2f;
    p = p * r + 1.6666665459e-1f;
    p = p * r + 5.0000001201e-1f;
    const float e = p * r * r + r + 1.0f;
    const std::int32_t ni = static_cast<std::int32_t>(nd);
    y[i] = e * std::bit_cast<float>((ni + 127) << 23);
  }
}

// --------------------------------------------------------------- reductions

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
T sum(const T* a, std::size_t n) {
  T s = 0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

template <typename T>
T sum_abs(const T* a, std::size_t n) {
  T s = 0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i]);
  return s;
}

template <typename T>
T max_value(const T* a, std::size_t n) {
  T m = a[0];
#pragma omp simd reduction(max : m)
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, a[i]);
  return m;
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void scale(T alpha, T* x, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

// -------------------------------------------------------------- elementwise

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) dx[i] += x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void sigmoid_forward(const T* x, T* y, std::size_t n) {
  std::vector<T> e(n);
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) e[i] = -x[i];
  exp_array(e.data(), e.data(), n);
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + e[i]);
}

// ------------------------------------------------------------------- conv2d

template <typename T>
void conv2d_forward(const T* in, int ci, int h, int w, const T* weights,
                    const T* bias, int co, int k, T* out) {
  const int p = k / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < co; ++oc) {
    T* op = out + oc * plane;
    std::fill(op, op + plane, bias ? bias[oc] : T(0));
    for (int ic = 0; ic < ci; ++ic) {
      const T* ip = in + ic * plane;
      for (int dy = 0; dy < k; ++dy) {
        const int oy0 = std::max(0, p - dy);
        const int oy1 = std::min(h, h + p - dy);
        for (int dx = 0; dx < k; ++dx) {
          const T wv = weights[((static_cast<std::size_t>(oc) * ci + ic) * k + dy) * k + dx];
          const int ox0 = std::max(0, p - dx);
          const int ox1 = std::min(w, w + p - dx);
          for (int y = oy0; y < oy1; ++y) {
            T* orow = op + static_cast<std::size_t>(y) * w;
            const T* irow = ip + static_cast<std::size_t>(y + dy - p) * w + (dx - p);
#pragma omp simd
            for (int x = ox0; x < ox1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(const T* weights, const T* dout, int ci, int h,
                           int w, int co, int k, T* din) {
  const int p = k / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < ci; ++ic) {
    T* dp = din + ic * plane;
    for (int oc = 0; oc < co; ++oc) {
      const T* gp = dout + oc * plane;
      for (int dy = 0; dy < k; ++dy) {
        // din(y + dy - p) accumulates dout(y): iterate over input rows yy
        const int yy0 = std::max(0, dy - p);
        const int yy1 = std::min(h, h + dy - p);
        for (int dx = 0; dx < k; ++dx) {
          const T wv = weights[((static_cast<std::size_t>(oc) * ci + ic) * k + dy) * k + dx];
          const int xx0 = std::max(0, dx - p);
          const int xx1 = std::min(w, w + dx - p);
          for (int yy = yy0; yy < yy1; ++yy) {
            T* drow = dp + static_cast<std::size_t>(yy) * w;
            const T* grow = gp + static_cast<std::size_t>(yy - dy + p) * w - (dx - p);
#pragma omp simd
            for (int xx = xx0; xx < xx1; ++xx) drow[xx] += wv * grow[xx];
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
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < co; ++oc) {
    const T* gp = dout + oc * plane;
    if (dbias) dbias[oc] += sum(gp, plane);
    for (int ic = 0; ic < ci; ++ic) {
      const T* ip = in + ic * plane;
      for (int dy = 0; dy < k; ++dy) {
        const int oy0 = std::max(0, p - dy);
        const int oy1 = std::min(h, h + p - dy);
        for (int dx = 0; dx < k; ++dx) {
          const int ox0 = std::max(0, p - dx);
          const int ox1 = std::min(w, w + p - dx);
          T acc = 0;
          for (int y = oy0; y < oy1; ++y) {
            const T* grow = gp + static_cast<std::size_t>(y) * w;
            const T* irow = ip + static_cast<std::size_t>(y + dy - p) * w + (dx - p);
            T s = 0;
#pragma omp simd reduction(+ : s)
            for (int x = ox0; x < ox1; ++x) s += grow[x] * irow[x];
            acc += s;
          }
          dweights[((static_cast<std::size_t>(oc) * ci + ic) * k + dy) * k + dx] += acc;
        }
      }
    }
  }
}

// --------------------------------------------------------------------- gemm

template <typename T>
void gemm_nn(int m, int k, int n, const T* a, const T* b, T* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const T av = a[static_cast<std::size_t>(i) * k + l];
      const T* brow = b + static_cast<std::size_t>(l) * n;
#pragma omp simd
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt(int m, int k, int n, const T* a, const T* b, T* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] += dot(arow, b + static_cast<std::size_t>(j) * k, k);
  }
}

template <typename T>
void gemm_tn(int m, int k, int n, const T* a, const T* b, T* c) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    for (int l = 0; l < k; ++l) {
      const T av = a[static_cast<std::size_t>(l) * m + i];
      const T* brow = b + static_cast<std::size_t>(l) * n;
#pragma omp simd
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void transpose(const T* in, int rows, int cols, T* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out[static_cast<std::size_t>(j) * rows + i] = in[static_cast<std::size_t>(i) * cols + j];
}

// ------------------------------------------------------------------ softmax

template <typename T>
void softmax_rows(T* x, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    T* row = x + static_cast<std::size_t>(i) * n;
    const T mx = max_value(row, n);
#pragma omp simd
    for (int j = 0; j < n; ++j) row[j] -= mx;
    exp_array(row, row, static_cast<std::size_t>(n));
    const T inv = T(1) / sum(row, n);
#pragma omp simd
    for (int j = 0; j < n; ++j) row[j] *= inv;
  }
}

// ---------------------------------------------------------------- attention

template <typename T>
int attention_forward(const T* q, const T* kt, const T* vt, int n, int dk,
                      int cv, T* attn, T* y) {
  const T invsq = T(1) / std::sqrt(static_cast<T>(dk));
  int bad_rows = 0;
#pragma omp parallel reduction(+ : bad_rows)
  {
    std::vector<T> rowbuf(attn ? 0 : n);
    std::vector<T> qs(dk);
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      T* a = attn ? attn + static_cast<std::size_t>(i) * n : rowbuf.data();
      for (int l = 0; l < dk; ++l) qs[l] = q[static_cast<std::size_t>(i) * dk + l] * invsq;
      {
        const T q0 = qs[0];
        const T* ktrow = kt;
#pragma omp simd
        for (int j = 0; j < n; ++j) a[j] = q0 * ktrow[j];
      }
      for (int l = 1; l < dk; ++l) {
        const T ql = qs[l];
        const T* ktrow = kt + static_cast<std::size_t>(l) * n;
#pragma omp simd
        for (int j = 0; j < n; ++j) a[j] += ql * ktrow[j];
      }
      // a non-finite logit anywhere makes the row sum non-finite
      if (!std::isfinite(static_cast<double>(sum(a, n)))) {
        ++bad_rows;
        std::fill(y + static_cast<std::size_t>(i) * cv, y + static_cast<std::size_t>(i + 1) * cv, T(0));
        continue;
      }
      const T mx = max_value(a, n);
#pragma omp simd
      for (int j = 0; j < n; ++j) a[j] -= mx;
      exp_array(a, a, static_cast<std::size_t>(n));
      const T inv = T(1) / sum(a, n);
#pragma omp simd
      for (int j = 0; j < n; ++j) a[j] *= inv;
      for (int c = 0; c < cv; ++c)
        y[static_cast<std::size_t>(i) * cv + c] = dot(a, vt + static_cast<std::size_t>(c) * n, static_cast<std::size_t>(n));
    }
  }
  return bad_rows;
}

template <typename T>
void attention_backward(const T* q, const T* kt, const T* vt, const T* attn,
                        const T* dy, int n, int dk, int cv, T* dq, T* dkt,
                        T* dvt) {
  const T invsq = T(1) / std::sqrt(static_cast<T>(dk));
  // dkt/dvt accumulate across rows: per-chunk partials, reduced in fixed
  // order so the result is thread-count independent.
  const std::size_t szk = static_cast<std::size_t>(dk) * n;
  const std::size_t szv = static_cast<std::size_t>(cv) * n;
  std::vector<T> dkt_part(static_cast<std::size_t>(kReduceChunks) * szk, T(0));
  std::vector<T> dvt_part(static_cast<std::size_t>(kReduceChunks) * szv, T(0));
#pragma omp parallel for schedule(static)
  for (int chunk = 0; chunk < kReduceChunks; ++chunk) {
    const int i0 = static_cast<int>(static_cast<std::int64_t>(n) * chunk / kReduceChunks);
    const int i1 = static_cast<int>(static_cast<std::int64_t>(n) * (chunk + 1) / kReduceChunks);
    T* dkt_c = dkt_part.data() + static_cast<std::size_t>(chunk) * szk;
    T* dvt_c = dvt_part.data() + static_cast<std::size_t>(chunk) * szv;
    std::vector<T> drow(n);
    for (int i = i0; i < i1; ++i) {
      const T* a = attn + static_cast<std::size_t>(i) * n;
      const T* dyrow = dy + static_cast<std::size_t>(i) * cv;
      {
        const T g0 = dyrow[0];
        const T* vtrow = vt;
#pragma omp simd
        for (int j = 0; j < n; ++j) drow[j] = g0 * vtrow[j];
      }
      for (int c = 1; c < cv; ++c) {
        const T g = dyrow[c];
        const T* vtrow = vt + static_cast<std::size_t>(c) * n;
#pragma omp simd
        for (int j = 0; j < n; ++j) drow[j] += g * vtrow[j];
      }
      for (int c = 0; c < cv; ++c) {
        const T g = dyrow[c];
        T* dvtrow = dvt_c + static_cast<std::size_t>(c) * n;
#pragma omp simd
        for (int j = 0; j < n; ++j) dvtrow[j] += g * a[j];
      }
      const T dotv = dot(a, drow.data(), n);
#pragma omp simd
      for (int j = 0; j < n; ++j) drow[j] = invsq * a[j] * (drow[j] - dotv);
      for (int l = 0; l < dk; ++l) {
        const T* ktrow = kt + static_cast<std::size_t>(l) * n;
        T* dktrow = dkt_c + static_cast<std::size_t>(l) * n;
        const T qv = q[static_cast<std::size_t>(i) * dk + l];
        dq[static_cast<std::size_t>(i) * dk + l] += dot(drow.data(), ktrow, n);
#pragma omp simd
        for (int j = 0; j < n; ++j) dktrow[j] += qv * drow[j];
      }
    }
  }
  for (int chunk = 0; chunk < kReduceChunks; ++chunk) {
    axpy(T(1), dkt_part.data() + static_cast<std::size_t>(chunk) * szk, dkt, szk);
    axpy(T(1), dvt_part.data() + static_cast<std::size_t>(chunk) * szv, dvt, szv);
  }
}

// ------------------------------------------------------------------- resize

template <typename T>
void bilinear_resize_forward(const T* in, int c, int h, int w, int oh, int ow,
                             T* out) {
  const double sy = static_cast<double>(h) / oh;
  const double sx = static_cast<double>(w) / ow;
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    const T* src = in + static_cast<std::size_t>(ch) * h * w;
    T* dst = out + static_cast<std::size_t>(ch) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      const double fy = (oy + 0.5) * sy - 0.5;
      const int y0 = static_cast<int>(std::floor(fy));
      const T wy = static_cast<T>(fy - y0);
      const int y0c = std::clamp(y0, 0, h - 1);
      const int y1c = std::clamp(y0 + 1, 0, h - 1);
      for (int ox = 0; ox < ow; ++ox) {
        const double fx = (ox + 0.5) * sx - 0.5;
        const int x0 = static_cast<int>(std::floor(fx));
        const T wx = static_cast<T>(fx - x0);
        const int x0c = std::clamp(x0, 0, w - 1);
        const int x1c = std::clamp(x0 + 1, 0, w - 1);
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
  // scatter overlaps within a channel; channels are independent
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    T* dst = din + static_cast<std::size_t>(ch) * h * w;
    const T* src = dout + static_cast<std::size_t>(ch) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      const double fy = (oy + 0.5) * sy - 0.5;
      const int y0 = static_cast<int>(std::floor(fy));
      const T wy = static_cast<T>(fy - y0);
      const int y0c = std::clamp(y0, 0, h - 1);
      const int y1c = std::clamp(y0 + 1, 0, h - 1);
      for (int ox = 0; ox < ow; ++ox) {
        const double fx = (ox + 0.5) * sx - 0.5;
        const int x0 = static_cast<int>(std::floor(fx));
        const T wx = static_cast<T>(fx - x0);
        const int x0c = std::clamp(x0, 0, w - 1);
        const int x1c = std::clamp(x0 + 1, 0, w - 1);
        const T g = src[static_cast<std::size_t>(oy) * ow + ox];
        dst[static_cast<std::size_t>(y0c) * w + x0c] += (T(1) - wy) * (T(1) - wx) * g;
        dst[static_cast<std::size_t>(y0c) * w + x1c] += (T(1) - wy) * wx * g;
        dst[static_cast<std::size_t>(y1c) * w + x0c] += wy * (T(1) - wx) * g;
        dst[static_cast<std::size_t>(y1c) * w + x1c] += wy * wx * g;
      }
    }
  }
}

// ------------------------------------------------------------ pixel shuffle

template <typename T>
void pixel_shuffle_forward(const T* in, int c_out, int h, int w, int r,
                           T* out) {
  const int oh = h * r, ow = w * r;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < c_out; ++c)
    for (int dy = 0; dy < r; ++dy)
      for (int dx = 0; dx < r; ++dx) {
        const T* src = in + static_cast<std::size_t>(c * r * r + dy * r + dx) * h * w;
        for (int y = 0; y < h; ++y) {
          T* dst = out + (static_cast<std::size_t>(c) * oh + (y * r + dy)) * ow + dx;
          const T* srow = src + static_cast<std::size_t>(y) * w;
          for (int x = 0; x < w; ++x) dst[static_cast<std::size_t>(x) * r] = srow[x];
        }
      }
}

template <typename T>
void pixel_shuffle_backward(const T* dout, int c_out, int h, int w, int r,
                            T* din) {
  const int oh = h * r, ow = w * r;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < c_out; ++c)
    for (int dy = 0; dy < r; ++dy)
      for (int dx = 0; dx < r; ++dx) {
        T* dst = din + static_cast<std::size_t>(c * r * r + dy * r + dx) * h * w;
        for (int y = 0; y < h; ++y) {
          const T* srow = dout + (static_cast<std::size_t>(c) * oh + (y * r + dy)) * ow + dx;
          T* drow = dst + static_cast<std::size_t>(y) * w;
          for (int x = 0; x < w; ++x) drow[x] += srow[static_cast<std::size_t>(x) * r];
        }
      }
}

// ------------------------------------------------------------- channel mean

template <typename T>
void channel_mean(const T* in, int c, int h, int w, T* out) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch)
    out[ch] = sum(in + ch * plane, plane) / static_cast<T>(plane);
}

template <typename T>
void channel_mean_backward(const T* dmean, int c, int h, int w, T* din) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < c; ++ch) {
    const T g = dmean[ch] / static_cast<T>(plane);
    T* dp = din + ch * plane;
#pragma omp simd
    for (std::size_t i = 0; i < plane; ++i) dp[i] += g;
  }
}

#define NAIMA_INSTANTIATE_OMP(T)                                               \
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
  template int attention_forward(const T*, const T*, const T*, int, int, int, \
                                 T*, T*);                                     \
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

NAIMA_INSTANTIATE_OMP(float)
NAIMA_INSTANTIATE_OMP(double)

}  // namespace naima::kernels
