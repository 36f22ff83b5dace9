#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "naima/kernels.hpp"
#include "naima/rng.hpp"
#include "test_util.hpp"

using naima::Rng;
namespace nk = naima::kernels;
namespace ref = naima::kernels::ref;
using testutil::max_abs_diff;
using testutil::rel_err;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, Rng& rng, double lo = -1.0,
                          double hi = 1.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return v;
}

// Brute-force scalar attention oracle, all math in long double for headroom.
void attention_oracle(const double* q, const double* kt, const double* vt,
                      int n, int dk, int cv, double* y, double* attn) {
  for (int i = 0; i < n; ++i) {
    std::vector<long double> logits(n);
    for (int j = 0; j < n; ++j) {
      long double s = 0;
      for (int l = 0; l < dk; ++l)
        s += static_cast<long double>(q[i * dk + l]) * kt[l * n + j];
      logits[j] = s / std::sqrt(static_cast<long double>(dk));
    }
    long double mx = logits[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, logits[j]);
    long double denom = 0;
    for (int j = 0; j < n; ++j) denom += std::exp(logits[j] - mx);
    for (int j = 0; j < n; ++j) {
      const long double a = std::exp(logits[j] - mx) / denom;
      if (attn) attn[i * n + j] = static_cast<double>(a);
      for (int c = 0; c < cv; ++c) {
        if (j == 0) y[i * cv + c] = 0;
        y[i * cv + c] += static_cast<double>(a * vt[c * n + j]);
      }
    }
  }
}

}  // namespace

TEST_CASE("exp_array matches std::exp") {
  Rng rng(11);
  const std::size_t n = 4099;
  auto xd = random_vec<double>(n, rng, -40.0, 40.0);
  std::vector<double> got(n), want(n);
  nk::exp_array(xd.data(), got.data(), n);
  for (std::size_t i = 0; i < n; ++i) want[i] = std::exp(xd[i]);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(rel_err(got[i], want[i]) < 1e-13);

  auto xf = random_vec<float>(n, rng, -20.0, 20.0);
  std::vector<float> gotf(n);
  nk::exp_array(xf.data(), gotf.data(), n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(rel_err(gotf[i], std::exp(static_cast<double>(xf[i]))) < 1e-6);

  // extremes saturate instead of producing inf/0-denormal garbage
  double edge[4] = {-1000.0, 1000.0, 0.0, 1.0};
  double eo[4];
  nk::exp_array(edge, eo, 4);
  CHECK(std::isfinite(eo[0]));
  CHECK(std::isfinite(eo[1]));
  CHECK(eo[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eo[3] == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("reductions and axpy/scale: optimized vs serial reference") {
  Rng rng(12);
  const std::size_t n = 10007;
  auto a = random_vec<double>(n, rng);
  auto b = random_vec<double>(n, rng);

  CHECK(rel_err(nk::dot(a.data(), b.data(), n), ref::dot(a.data(), b.data(), n),
                1e-9) < 1e-12);
  CHECK(rel_err(nk::sum(a.data(), n), ref::sum(a.data(), n), 1e-9) < 1e-12);
  CHECK(rel_err(nk::sum_abs(a.data(), n), ref::sum_abs(a.data(), n)) < 1e-13);
  CHECK(nk::max_value(a.data(), n) == ref::max_value(a.data(), n));

  auto y1 = b, y2 = b;
  nk::axpy(0.37, a.data(), y1.data(), n);
  ref::axpy(0.37, a.data(), y2.data(), n);
  CHECK(max_abs_diff(y1.data(), y2.data(), n) < 1e-15);

  auto s1 = a, s2 = a;
  nk::scale(1.7, s1.data(), n);
  ref::scale(1.7, s2.data(), n);
  CHECK(max_abs_diff(s1.data(), s2.data(), n) == 0.0);

  // float path stays within reassociation noise of the double reference
  auto af = random_vec<float>(n, rng);
  auto bf = random_vec<float>(n, rng);
  std::vector<double> ad(af.begin(), af.end()), bd(bf.begin(), bf.end());
  CHECK(rel_err(nk::dot(af.data(), bf.data(), n),
                ref::dot(ad.data(), bd.data(), n), 1.0) < 1e-4);
}

TEST_CASE("relu and sigmoid") {
  Rng rng(13);
  const std::size_t n = 513;
  auto x = random_vec<double>(n, rng, -2.0, 2.0);
  std::vector<double> y1(n), y2(n);
  nk::relu_forward(x.data(), y1.data(), n);
  ref::relu_forward(x.data(), y2.data(), n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(y1[i] == std::max(0.0, x[i]));
    CHECK(y1[i] == y2[i]);
  }

  auto dy = random_vec<double>(n, rng);
  std::vector<double> dx1(n, 0.5), dx2(n, 0.5);  // backward accumulates
  nk::relu_backward(x.data(), dy.data(), dx1.data(), n);
  ref::relu_backward(x.data(), dy.data(), dx2.data(), n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(dx1[i] == dx2[i]);
    CHECK(dx1[i] == 0.5 + (x[i] > 0 ? dy[i] : 0.0));
  }

  std::vector<double> s1(n), s2(n);
  nk::sigmoid_forward(x.data(), s1.data(), n);
  ref::sigmoid_forward(x.data(), s2.data(), n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(rel_err(s1[i], 1.0 / (1.0 + std::exp(-x[i]))) < 1e-13);
    CHECK(rel_err(s1[i], s2[i]) < 1e-13);
  }
}

TEST_CASE("conv2d forward: scalar oracle, zero padding, backends agree") {
  Rng rng(14);
  const int ci = 3, co = 5, h = 9, w = 11, k = 3, p = k / 2;
  auto in = random_vec<double>(static_cast<std::size_t>(ci) * h * w, rng);
  auto wgt = random_vec<double>(static_cast<std::size_t>(co) * ci * k * k, rng);
  auto bias = random_vec<double>(co, rng);
  std::vector<double> out1(static_cast<std::size_t>(co) * h * w);
  std::vector<double> out2(out1.size());
  nk::conv2d_forward(in.data(), ci, h, w, wgt.data(), bias.data(), co, k,
                     out1.data());
  ref::conv2d_forward(in.data(), ci, h, w, wgt.data(), bias.data(), co, k,
                      out2.data());
  CHECK(max_abs_diff(out1.data(), out2.data(), out1.size()) < 1e-13);

  // independent scalar oracle with explicit zero padding
  for (int oc = 0; oc < co; ++oc)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = bias[oc];
        for (int icx = 0; icx < ci; ++icx)
          for (int dy = 0; dy < k; ++dy)
            for (int dx = 0; dx < k; ++dx) {
              const int yy = y + dy - p, xx = x + dx - p;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              acc += wgt[((static_cast<std::size_t>(oc) * ci + icx) * k + dy) * k + dx] *
                     in[(static_cast<std::size_t>(icx) * h + yy) * w + xx];
            }
        CHECK(rel_err(out1[(static_cast<std::size_t>(oc) * h + y) * w + x], acc,
                      1e-9) < 1e-12);
      }
}

TEST_CASE("conv2d backward: finite differences and backend agreement") {
  Rng rng(15);
  const int ci = 2, co = 3, h = 6, w = 5, k = 3;
  auto in = random_vec<double>(static_cast<std::size_t>(ci) * h * w, rng);
  auto wgt = random_vec<double>(static_cast<std::size_t>(co) * ci * k * k, rng);
  auto bias = random_vec<double>(co, rng);
  auto g = random_vec<double>(static_cast<std::size_t>(co) * h * w, rng);

  // loss = <conv(in), g>
  auto loss = [&]() {
    std::vector<double> out(static_cast<std::size_t>(co) * h * w);
    nk::conv2d_forward(in.data(), ci, h, w, wgt.data(), bias.data(), co, k,
                       out.data());
    return nk::dot(out.data(), g.data(), out.size());
  };

  std::vector<double> din(in.size(), 0.0), dwgt(wgt.size(), 0.0),
      dbias(bias.size(), 0.0);
  nk::conv2d_backward_input(wgt.data(), g.data(), ci, h, w, co, k, din.data());
  nk::conv2d_backward_params(in.data(), g.data(), ci, h, w, co, k, dwgt.data(),
                             dbias.data());

  std::vector<double> din_r(in.size(), 0.0), dwgt_r(wgt.size(), 0.0),
      dbias_r(bias.size(), 0.0);
  ref::conv2d_backward_input(wgt.data(), g.data(), ci, h, w, co, k,
                             din_r.data());
  ref::conv2d_backward_params(in.data(), g.data(), ci, h, w, co, k,
                              dwgt_r.data(), dbias_r.data());
  CHECK(max_abs_diff(din.data(), din_r.data(), din.size()) < 1e-12);
  CHECK(max_abs_diff(dwgt.data(), dwgt_r.data(), dwgt.size()) < 1e-12);
  CHECK(max_abs_diff(dbias.data(), dbias_r.data(), dbias.size()) < 1e-12);

  Rng pick(99);
  for (int t = 0; t < 8; ++t) {
    const std::size_t ii = static_cast<std::size_t>(pick.next_below(static_cast<int>(in.size())));
    const std::size_t wi = static_cast<std::size_t>(pick.next_below(static_cast<int>(wgt.size())));
    CHECK(rel_err(din[ii], testutil::central_difference(&in[ii], 1e-6, loss),
                  1e-7) < 1e-6);
    CHECK(rel_err(dwgt[wi], testutil::central_difference(&wgt[wi], 1e-6, loss),
                  1e-7) < 1e-6);
  }
  for (int oc = 0; oc < co; ++oc)
    CHECK(rel_err(dbias[oc],
                  testutil::central_difference(&bias[oc], 1e-6, loss), 1e-7) <
          1e-6);
}

TEST_CASE("gemm variants match a naive oracle and accumulate into C") {
  Rng rng(16);
  const int m = 7, k = 9, n = 8;
  auto a = random_vec<double>(static_cast<std::size_t>(m) * k, rng);
  auto b = random_vec<double>(static_cast<std::size_t>(k) * n, rng);
  auto bt = std::vector<double>(b.size());
  nk::transpose(b.data(), k, n, bt.data());  // n x k
  auto at = std::vector<double>(a.size());
  nk::transpose(a.data(), m, k, at.data());  // k x m

  std::vector<double> want(static_cast<std::size_t>(m) * n);
  Rng rc(17);
  for (auto& x : want) x = rc.uniform(-1, 1);
  const std::vector<double> c0 = want;  // preloaded C, gemm must +=
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0;
      for (int l = 0; l < k; ++l) acc += a[i * k + l] * b[l * n + j];
      want[static_cast<std::size_t>(i) * n + j] += acc;
    }

  std::vector<double> c1 = c0, c2 = c0, c3 = c0, c1r = c0;
  nk::gemm_nn(m, k, n, a.data(), b.data(), c1.data());
  nk::gemm_nt(m, k, n, a.data(), bt.data(), c2.data());
  nk::gemm_tn(m, k, n, at.data(), b.data(), c3.data());
  ref::gemm_nn(m, k, n, a.data(), b.data(), c1r.data());
  CHECK(max_abs_diff(c1.data(), want.data(), want.size()) < 1e-12);
  CHECK(max_abs_diff(c2.data(), want.data(), want.size()) < 1e-12);
  CHECK(max_abs_diff(c3.data(), want.data(), want.size()) < 1e-12);
  CHECK(max_abs_diff(c1.data(), c1r.data(), want.size()) < 1e-12);
}

TEST_CASE("transpose is an involution with the index oracle") {
  Rng rng(18);
  const int r = 13, c = 7;
  auto a = random_vec<double>(static_cast<std::size_t>(r) * c, rng);
  std::vector<double> t(a.size()), back(a.size());
  nk::transpose(a.data(), r, c, t.data());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      CHECK(t[static_cast<std::size_t>(j) * r + i] == a[static_cast<std::size_t>(i) * c + j]);
  nk::transpose(t.data(), c, r, back.data());
  CHECK(max_abs_diff(a.data(), back.data(), a.size()) == 0.0);
}

TEST_CASE("softmax_rows: normalization, shift invariance, backends agree") {
  Rng rng(19);
  const int m = 17, n = 23;
  auto x = random_vec<double>(static_cast<std::size_t>(m) * n, rng, -8.0, 8.0);
  auto x1 = x, x2 = x, xs = x;
  for (auto& v : xs) v += 123.25;  // per-element shift = per-row shift
  nk::softmax_rows(x1.data(), m, n);
  ref::softmax_rows(x2.data(), m, n);
  nk::softmax_rows(xs.data(), m, n);
  CHECK(max_abs_diff(x1.data(), x2.data(), x.size()) < 1e-14);
  CHECK(max_abs_diff(x1.data(), xs.data(), x.size()) < 1e-13);
  for (int i = 0; i < m; ++i) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      s += x1[static_cast<std::size_t>(i) * n + j];
      CHECK(x1[static_cast<std::size_t>(i) * n + j] >= 0.0);
    }
    CHECK(rel_err(s, 1.0) < 1e-12);
  }
}

TEST_CASE("attention_forward matches the brute-force oracle") {
  Rng rng(20);
  for (int n : {2, 5, 33}) {
    for (int dk : {1, 3, 8}) {
      const int cv = 6;
      auto q = random_vec<double>(static_cast<std::size_t>(n) * dk, rng, -2, 2);
      auto kt = random_vec<double>(static_cast<std::size_t>(dk) * n, rng, -2, 2);
      auto vt = random_vec<double>(static_cast<std::size_t>(cv) * n, rng, -2, 2);
      std::vector<double> y(static_cast<std::size_t>(n) * cv),
          attn(static_cast<std::size_t>(n) * n),
          yw(y.size()), aw(attn.size());
      CHECK(nk::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv,
                                  attn.data(), y.data()) == 0);
      attention_oracle(q.data(), kt.data(), vt.data(), n, dk, cv, yw.data(),
                       aw.data());
      CHECK(max_abs_diff(y.data(), yw.data(), y.size()) < 1e-12);
      CHECK(max_abs_diff(attn.data(), aw.data(), attn.size()) < 1e-12);

      // null attn pointer gives the same y
      std::vector<double> y2(y.size());
      double* no_attn = nullptr;
      CHECK(nk::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv,
                                  no_attn, y2.data()) == 0);
      CHECK(max_abs_diff(y.data(), y2.data(), y.size()) == 0.0);

      // serial reference agrees
      std::vector<double> yr(y.size()), ar(attn.size());
      CHECK(ref::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv,
                                   ar.data(), yr.data()) == 0);
      CHECK(max_abs_diff(y.data(), yr.data(), y.size()) < 1e-12);
    }
  }
}

TEST_CASE("attention_forward flags non-finite rows and zeroes their output") {
  Rng rng(21);
  const int n = 6, dk = 3, cv = 4;
  auto q = random_vec<double>(static_cast<std::size_t>(n) * dk, rng);
  auto kt = random_vec<double>(static_cast<std::size_t>(dk) * n, rng);
  auto vt = random_vec<double>(static_cast<std::size_t>(cv) * n, rng);
  q[2 * dk + 1] = std::numeric_limits<double>::quiet_NaN();  // poisons row 2
  q[5 * dk + 0] = std::numeric_limits<double>::infinity();   // poisons row 5
  std::vector<double> y(static_cast<std::size_t>(n) * cv, 7.0);
  std::vector<double> attn(static_cast<std::size_t>(n) * n);
  const int bad = nk::attention_forward(q.data(), kt.data(), vt.data(), n, dk,
                                        cv, attn.data(), y.data());
  CHECK(bad == 2);
  for (int c = 0; c < cv; ++c) {
    CHECK(y[2 * cv + c] == 0.0);
    CHECK(y[5 * cv + c] == 0.0);
  }
  // healthy rows still produce finite, normalized attention
  double s = 0;
  for (int j = 0; j < n; ++j) s += attn[0 * n + j];
  CHECK(rel_err(s, 1.0) < 1e-12);
  CHECK(ref::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv,
                               attn.data(), y.data()) == 2);
}

TEST_CASE("attention_backward passes finite differences and matches reference") {
  Rng rng(22);
  const int n = 5, dk = 3, cv = 4;
  auto q = random_vec<double>(static_cast<std::size_t>(n) * dk, rng, -1.5, 1.5);
  auto kt = random_vec<double>(static_cast<std::size_t>(dk) * n, rng, -1.5, 1.5);
  auto vt = random_vec<double>(static_cast<std::size_t>(cv) * n, rng, -1.5, 1.5);
  auto g = random_vec<double>(static_cast<std::size_t>(n) * cv, rng);

  auto loss = [&]() {
    std::vector<double> y(static_cast<std::size_t>(n) * cv);
    std::vector<double> attn(static_cast<std::size_t>(n) * n);
    nk::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv,
                          attn.data(), y.data());
    return nk::dot(y.data(), g.data(), y.size());
  };

  std::vector<double> attn(static_cast<std::size_t>(n) * n),
      y(static_cast<std::size_t>(n) * cv);
  nk::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv, attn.data(),
                        y.data());
  std::vector<double> dq(q.size(), 0.0), dkt(kt.size(), 0.0),
      dvt(vt.size(), 0.0);
  nk::attention_backward(q.data(), kt.data(), vt.data(), attn.data(), g.data(),
                         n, dk, cv, dq.data(), dkt.data(), dvt.data());

  std::vector<double> dq_r(q.size(), 0.0), dkt_r(kt.size(), 0.0),
      dvt_r(vt.size(), 0.0);
  ref::attention_backward(q.data(), kt.data(), vt.data(), attn.data(),
                          g.data(), n, dk, cv, dq_r.data(), dkt_r.data(),
                          dvt_r.data());
  CHECK(max_abs_diff(dq.data(), dq_r.data(), dq.size()) < 1e-12);
  CHECK(max_abs_diff(dkt.data(), dkt_r.data(), dkt.size()) < 1e-12);
  CHECK(max_abs_diff(dvt.data(), dvt_r.data(), dvt.size()) < 1e-12);

  for (std::size_t i = 0; i < q.size(); ++i)
    CHECK(rel_err(dq[i], testutil::central_difference(&q[i], 1e-6, loss), 1e-7) < 1e-6);
  for (std::size_t i = 0; i < kt.size(); ++i)
    CHECK(rel_err(dkt[i], testutil::central_difference(&kt[i], 1e-6, loss), 1e-7) < 1e-6);
  for (std::size_t i = 0; i < vt.size(); ++i)
    CHECK(rel_err(dvt[i], testutil::central_difference(&vt[i], 1e-6, loss), 1e-7) < 1e-6);
}

TEST_CASE("optimized attention agrees with the reference at working sizes") {
  Rng rng(23);
  const int n = 300, dk = 8, cv = 8;
  auto q = random_vec<double>(static_cast<std::size_t>(n) * dk, rng, -2, 2);
  auto kt = random_vec<double>(static_cast<std::size_t>(dk) * n, rng, -2, 2);
  auto vt = random_vec<double>(static_cast<std::size_t>(cv) * n, rng, -2, 2);
  std::vector<double> y1(static_cast<std::size_t>(n) * cv), y2(y1.size());
  std::vector<double> a1(static_cast<std::size_t>(n) * n), a2(a1.size());
  nk::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv, a1.data(),
                        y1.data());
  ref::attention_forward(q.data(), kt.data(), vt.data(), n, dk, cv, a2.data(),
                         y2.data());
  CHECK(max_abs_diff(y1.data(), y2.data(), y1.size()) < 1e-12);
  CHECK(max_abs_diff(a1.data(), a2.data(), a1.size()) < 1e-13);

  auto g = random_vec<double>(y1.size(), rng);
  std::vector<double> dq1(q.size(), 0), dk1(kt.size(), 0), dv1(vt.size(), 0);
  std::vector<double> dq2(q.size(), 0), dk2(kt.size(), 0), dv2(vt.size(), 0);
  nk::attention_backward(q.data(), kt.data(), vt.data(), a1.data(), g.data(),
                         n, dk, cv, dq1.data(), dk1.data(), dv1.data());
  ref::attention_backward(q.data(), kt.data(), vt.data(), a1.data(), g.data(),
                          n, dk, cv, dq2.data(), dk2.data(), dv2.data());
  CHECK(max_abs_diff(dq1.data(), dq2.data(), dq1.size()) < 1e-11);
  CHECK(max_abs_diff(dk1.data(), dk2.data(), dk1.size()) < 1e-11);
  CHECK(max_abs_diff(dv1.data(), dv2.data(), dv1.size()) < 1e-11);
}

TEST_CASE("bilinear resize: constants, scalar oracle, adjoint backward") {
  Rng rng(24);
  const int c = 2, h = 7, w = 9, oh = 12, ow = 5;
  auto in = random_vec<double>(static_cast<std::size_t>(c) * h * w, rng);
  std::vector<double> out(static_cast<std::size_t>(c) * oh * ow);
  nk::bilinear_resize_forward(in.data(), c, h, w, oh, ow, out.data());

  // scalar oracle: half-pixel centers, clamp-to-edge
  for (int ch = 0; ch < c; ++ch)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double sy = (oy + 0.5) * h / oh - 0.5;
        const double sx = (ox + 0.5) * w / ow - 0.5;
        const int y0 = static_cast<int>(std::floor(sy));
        const int x0 = static_cast<int>(std::floor(sx));
        const double fy = sy - y0, fx = sx - x0;
        auto sample = [&](int y, int x) {
          y = std::clamp(y, 0, h - 1);
          x = std::clamp(x, 0, w - 1);
          return in[(static_cast<std::size_t>(ch) * h + y) * w + x];
        };
        const double want =
            (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
            fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
        CHECK(rel_err(out[(static_cast<std::size_t>(ch) * oh + oy) * ow + ox],
                      want, 1e-9) < 1e-12);
      }

  std::vector<double> flat(static_cast<std::size_t>(c) * h * w, 3.25);
  std::vector<double> flat_out(static_cast<std::size_t>(c) * oh * ow);
  nk::bilinear_resize_forward(flat.data(), c, h, w, oh, ow, flat_out.data());
  for (double v : flat_out) CHECK(rel_err(v, 3.25) < 1e-14);

  // adjoint: <A x, g> == <x, A^T g>
  auto g = random_vec<double>(out.size(), rng);
  std::vector<double> din(in.size(), 0.0);
  nk::bilinear_resize_backward(g.data(), c, h, w, oh, ow, din.data());
  const double lhs = nk::dot(out.data(), g.data(), out.size());
  const double rhs = nk::dot(in.data(), din.data(), in.size());
  CHECK(rel_err(lhs, rhs) < 1e-12);

  std::vector<double> din_r(in.size(), 0.0);
  ref::bilinear_resize_backward(g.data(), c, h, w, oh, ow, din_r.data());
  CHECK(max_abs_diff(din.data(), din_r.data(), din.size()) < 1e-12);
}

TEST_CASE("pixel_shuffle: index oracle, bijection, exact inverse backward") {
  Rng rng(25);
  for (int c : {1, 2}) {
    for (int r : {1, 2, 3}) {
      const int h = 4, w = 5;
      auto in = random_vec<double>(static_cast<std::size_t>(c) * r * r * h * w, rng);
      std::vector<double> out(in.size());
      nk::pixel_shuffle_forward(in.data(), c, h, w, r, out.data());
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            for (int dy = 0; dy < r; ++dy)
              for (int dx = 0; dx < r; ++dx) {
                const std::size_t src =
                    ((static_cast<std::size_t>(ch) * r * r + dy * r + dx) * h + y) * w + x;
                const std::size_t dst =
                    (static_cast<std::size_t>(ch) * (h * r) + (y * r + dy)) *
                        (w * r) + (x * r + dx);
                CHECK(out[dst] == in[src]);
              }
      auto si = in, so = out;
      std::sort(si.begin(), si.end());
      std::sort(so.begin(), so.end());
      CHECK(si == so);  // value multiset preserved exactly

      // the permutation's adjoint is its inverse
      std::vector<double> back(in.size(), 0.0);
      nk::pixel_shuffle_backward(out.data(), c, h, w, r, back.data());
      CHECK(max_abs_diff(back.data(), in.data(), in.size()) == 0.0);

      std::vector<double> out_r(in.size());
      ref::pixel_shuffle_forward(in.data(), c, h, w, r, out_r.data());
      CHECK(max_abs_diff(out.data(), out_r.data(), out.size()) == 0.0);
    }
  }
}

TEST_CASE("channel_mean and its backward") {
  Rng rng(26);
  const int c = 4, h = 5, w = 6;
  auto in = random_vec<double>(static_cast<std::size_t>(c) * h * w, rng);
  std::vector<double> m1(c), m2(c);
  nk::channel_mean(in.data(), c, h, w, m1.data());
  ref::channel_mean(in.data(), c, h, w, m2.data());
  for (int ch = 0; ch < c; ++ch) {
    double s = 0;
    for (int i = 0; i < h * w; ++i) s += in[static_cast<std::size_t>(ch) * h * w + i];
    CHECK(rel_err(m1[ch], s / (h * w), 1e-9) < 1e-12);
    CHECK(rel_err(m1[ch], m2[ch], 1e-9) < 1e-14);
  }
  std::vector<double> dmean(c);
  for (int ch = 0; ch < c; ++ch) dmean[ch] = 0.5 + ch;
  std::vector<double> din(in.size(), 1.0), din_r(in.size(), 1.0);
  nk::channel_mean_backward(dmean.data(), c, h, w, din.data());
  ref::channel_mean_backward(dmean.data(), c, h, w, din_r.data());
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < h * w; ++i)
      CHECK(rel_err(din[static_cast<std::size_t>(ch) * h * w + i],
                    1.0 + dmean[ch] / (h * w)) < 1e-14);
  CHECK(max_abs_diff(din.data(), din_r.data(), din.size()) == 0.0);
}
