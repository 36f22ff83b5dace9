#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "naima/bicubic.hpp"
#include "naima/error.hpp"
#include "naima/rng.hpp"
#include "test_util.hpp"

using naima::Rng;
using naima::Tensor;
using testutil::random_tensor;
using testutil::rel_err;

namespace {

// Independent scalar resampler: Catmull-Rom kernel (a = -0.5), half-pixel
// centers, reflected borders, kernel stretched by the ratio when
// downscaling, weights renormalized. Non-separable evaluation, so agreement
// with the separable library implementation is to rounding, not bitwise.
double cubic(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return a * (((x - 5.0) * x + 8.0) * x - 4.0);
  return 0.0;
}

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int m = 2 * (n - 1);
  i = ((i % m) + m) % m;
  return i < n ? i : m - i;
}

double resample_axis_weighted(const std::vector<double>& taps) {
  double s = 0;
  for (double t : taps) s += t;
  return s;
}

Tensor<double> oracle_resize(const Tensor<double>& in, int oh, int ow) {
  const int c = in.channels(), h = in.height(), w = in.width();
  const double ry = static_cast<double>(h) / oh;
  const double rx = static_cast<double>(w) / ow;
  const double sy = std::max(ry, 1.0), sx = std::max(rx, 1.0);
  const int nty = static_cast<int>(std::ceil(2.0 * sy * 2.0)) + 1;
  const int ntx = static_cast<int>(std::ceil(2.0 * sx * 2.0)) + 1;
  Tensor<double> out(c, oh, ow);
  for (int ch = 0; ch < c; ++ch)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        const double cy = (oy + 0.5) * ry - 0.5;
        const double cx = (ox + 0.5) * rx - 0.5;
        const int fy = static_cast<int>(std::floor(cy - 2.0 * sy)) + 1;
        const int fx = static_cast<int>(std::floor(cx - 2.0 * sx)) + 1;
        std::vector<double> wy(nty), wx(ntx);
        for (int k = 0; k < nty; ++k) wy[k] = cubic((cy - (fy + k)) / sy);
        for (int k = 0; k < ntx; ++k) wx[k] = cubic((cx - (fx + k)) / sx);
        const double iny = 1.0 / resample_axis_weighted(wy);
        const double inx = 1.0 / resample_axis_weighted(wx);
        double acc = 0;
        for (int ky = 0; ky < nty; ++ky)
          for (int kx = 0; kx < ntx; ++kx)
            acc += wy[ky] * iny * wx[kx] * inx *
                   in.at(ch, reflect(fy + ky, h), reflect(fx + kx, w));
        out.at(ch, oy, ox) = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("bicubic_resize matches the independent scalar oracle") {
  Rng rng(31);
  struct Case { int h, w, oh, ow; };
  for (const Case& cs : {Case{12, 16, 24, 32}, Case{24, 32, 6, 8},
                         Case{9, 7, 14, 10}, Case{10, 10, 10, 10},
                         Case{5, 8, 13, 3}}) {
    Tensor<double> in = random_tensor<double>(2, cs.h, cs.w, rng);
    Tensor<double> got = naima::bicubic_resize(in, cs.oh, cs.ow);
    Tensor<double> want = oracle_resize(in, cs.oh, cs.ow);
    CHECK(testutil::max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("constants and linear ramps are reproduced") {
  Tensor<double> flat(1, 10, 12, 2.75);
  Tensor<double> up = naima::bicubic_resize(flat, 25, 30);
  for (std::size_t i = 0; i < up.size(); ++i)
    CHECK(rel_err(up.data()[i], 2.75) < 1e-13);

  // Catmull-Rom reproduces linear functions exactly where the support does
  // not touch the reflected border, so check interior columns only.
  Tensor<double> ramp(1, 8, 16);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 16; ++x) ramp.at(0, y, x) = 3.0 * x + 0.5;
  Tensor<double> up2 = naima::bicubic_resize(ramp, 8, 32);
  for (int x = 8; x < 24; ++x) {
    const double sx = (x + 0.5) * 0.5 - 0.5;
    CHECK(rel_err(up2.at(0, 4, x), 3.0 * sx + 0.5) < 1e-12);
  }
}

TEST_CASE("upsample and downsample wrappers") {
  Rng rng(32);
  Tensor<double> in = random_tensor<double>(1, 12, 8, rng);
  Tensor<double> up = naima::bicubic_upsample(in, 4);
  CHECK(up.channels() == 1);
  CHECK(up.height() == 48);
  CHECK(up.width() == 32);
  Tensor<double> same = naima::bicubic_resize(in, 48, 32);
  CHECK(testutil::bitwise_equal(up, same));

  Tensor<double> hr = random_tensor<double>(1, 48, 32, rng);
  Tensor<double> down = naima::bicubic_downsample(hr, 4);
  CHECK(down.height() == 12);
  CHECK(down.width() == 8);
  Tensor<double> same2 = naima::bicubic_resize(hr, 12, 8);
  CHECK(testutil::bitwise_equal(down, same2));
}

TEST_CASE("downsample antialiases: alternating stripes shrink toward the mean") {
  // Without kernel stretching, 4x decimation of a +/-1 checker row can alias
  // to near-full amplitude; the stretched kernel must average it down.
  Tensor<double> stripes(1, 16, 64);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 64; ++x) stripes.at(0, y, x) = (x % 2 == 0) ? 1.0 : -1.0;
  Tensor<double> down = naima::bicubic_downsample(stripes, 4);
  for (int y = 1; y < 3; ++y)
    for (int x = 2; x < 14; ++x)
      CHECK(std::fabs(down.at(0, y, x)) < 0.2);
}

TEST_CASE("float path tracks the double path") {
  Rng rng(33);
  Tensor<double> ind = random_tensor<double>(1, 14, 14, rng, 0.0, 1.0);
  Tensor<float> inf = ind.cast<float>();
  Tensor<double> upd = naima::bicubic_upsample(ind, 2);
  Tensor<float> upf = naima::bicubic_upsample(inf, 2);
  CHECK(testutil::max_abs_diff(upd, upf.cast<double>()) < 1e-6);
}

TEST_CASE("degenerate targets are rejected") {
  Tensor<double> in(1, 4, 4, 1.0);
  CHECK_THROWS_AS(naima::bicubic_resize(in, 0, 4), naima::ShapeError);
  CHECK_THROWS_AS(naima::bicubic_resize(in, 4, -1), naima::ShapeError);
}
