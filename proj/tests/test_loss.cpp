#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "naima/error.hpp"
#include "naima/loss.hpp"
#include "test_util.hpp"

using naima::LossConfig;
using naima::LossParts;
using naima::Rng;
using naima::Tensor;
using testutil::central_difference;
using testutil::random_tensor;
using testutil::rel_err;

TEST_CASE("spatial gradients are forward differences with zeroed borders") {
  // d(y, x) = 3x + 5y, plus a second plane with swapped slopes
  Tensor<double> d(2, 3, 4);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) {
      d.plane(0)[y * 4 + x] = 3.0 * x + 5.0 * y;
      d.plane(1)[y * 4 + x] = 5.0 * x + 3.0 * y;
    }
  Tensor<double> gx, gy;
  naima::spatial_gradients(d, gx, gy);
  REQUIRE(gx.same_shape(d));
  REQUIRE(gy.same_shape(d));
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) {
      CHECK(gx.plane(0)[y * 4 + x] == (x == 3 ? 0.0 : 3.0));
      CHECK(gy.plane(0)[y * 4 + x] == (y == 2 ? 0.0 : 5.0));
      CHECK(gx.plane(1)[y * 4 + x] == (x == 3 ? 0.0 : 5.0));
      CHECK(gy.plane(1)[y * 4 + x] == (y == 2 ? 0.0 : 3.0));
    }
}

TEST_CASE("spatial gradients need at least a 2x2 map") {
  Tensor<double> row(1, 1, 5), col(1, 5, 1), gx, gy;
  CHECK_THROWS_AS(naima::spatial_gradients(row, gx, gy), naima::ShapeError);
  CHECK_THROWS_AS(naima::spatial_gradients(col, gx, gy), naima::ShapeError);
}

TEST_CASE("the loss of a map against itself is exactly zero") {
  Rng rng(31);
  Tensor<double> gt = random_tensor<double>(1, 6, 7, rng, 0.0, 2.0);
  LossConfig cfg;  // l1_grad, lambda 0.05
  const LossParts parts = naima::total_loss(gt, gt, cfg);
  CHECK(parts.l1 == 0.0);
  CHECK(parts.grad == 0.0);
  CHECK(parts.total == 0.0);
}

TEST_CASE("a constant offset on a uniform map costs exactly its magnitude") {
  const double c = -0.37;
  Tensor<double> gt(1, 5, 6);
  Tensor<double> pred(1, 5, 6);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt.data()[i] = 0.8;
    pred.data()[i] = 0.8 + c;
  }
  LossConfig cfg;
  const LossParts parts = naima::total_loss(pred, gt, cfg);
  CHECK(std::fabs(parts.l1 - std::fabs(c)) < 1e-12);
  CHECK(parts.grad == 0.0);  // both maps are flat
  CHECK(std::fabs(parts.total - std::fabs(c)) < 1e-12);
}

TEST_CASE("the gradient term ignores a constant shift of a textured map") {
  Rng rng(32);
  Tensor<double> gt = random_tensor<double>(1, 6, 8, rng, 0.0, 1.0);
  Tensor<double> pred = gt;
  for (std::size_t i = 0; i < pred.size(); ++i) pred.data()[i] += 0.25;
  LossConfig cfg;
  const LossParts parts = naima::total_loss(pred, gt, cfg);
  CHECK(parts.grad < 1e-12);
  CHECK(std::fabs(parts.l1 - 0.25) < 1e-12);
}

TEST_CASE("lambda zero reduces the objective to plain L1") {
  Rng rng(33);
  Tensor<double> gt = random_tensor<double>(1, 5, 5, rng);
  Tensor<double> pred = random_tensor<double>(1, 5, 5, rng);
  LossConfig cfg;
  cfg.lambda = 0.0;
  const LossParts parts = naima::total_loss(pred, gt, cfg);
  CHECK(parts.grad == 0.0);
  CHECK(parts.total == static_cast<double>(naima::l1_loss(pred, gt)));

  Tensor<double> dpred;
  naima::total_loss_backward(pred, gt, cfg, dpred);
  // pure L1: every gradient entry is +-1/n (no ties in random data)
  const double invn = 1.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < dpred.size(); ++i)
    CHECK(std::fabs(dpred.data()[i]) == invn);
}

TEST_CASE("the parts decompose as total = l1 + lambda * grad") {
  Rng rng(34);
  Tensor<double> gt = random_tensor<double>(2, 4, 6, rng, 0.0, 1.0);
  Tensor<double> pred = random_tensor<double>(2, 4, 6, rng, 0.0, 1.0);
  LossConfig cfg;
  cfg.lambda = 0.35;
  const LossParts parts = naima::total_loss(pred, gt, cfg);
  CHECK(parts.l1 == static_cast<double>(naima::l1_loss(pred, gt)));
  CHECK(parts.grad == static_cast<double>(naima::gradient_loss(pred, gt)));
  CHECK(parts.total == parts.l1 + cfg.lambda * parts.grad);

  Tensor<double> dpred;
  const LossParts again = naima::total_loss_backward(pred, gt, cfg, dpred);
  CHECK(again.total == parts.total);
  CHECK(again.l1 == parts.l1);
  CHECK(again.grad == parts.grad);
}

TEST_CASE("the backward stencil matches the hand-derived ramp vector exactly") {
  // pred(y, x) = 0.3 x + 0.2 y against a zero target on a 2x3 map.
  // Every |.| argument is strictly positive except pred(0,0) = 0, a tie.
  Tensor<double> pred(1, 2, 3), gt(1, 2, 3);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) pred.data()[y * 3 + x] = 0.3 * x + 0.2 * y;
  LossConfig cfg;  // lambda 0.05

  Tensor<double> dpred;
  naima::total_loss_backward(pred, gt, cfg, dpred);

  const double invn = 1.0 / 6.0;
  const double lam = cfg.lambda * invn;
  // L1 term: sgn(pred) * invn, with subgradient zero at the tie.
  // x-stencil per row: -lam at x=0, 0 at x=1, +lam at x=2.
  // y-stencil per column: -lam at y=0, +lam at y=1.
  double want[2][3];
  want[0][0] = 0.0;
  want[0][0] -= lam;
  want[0][0] -= lam;
  want[0][1] = invn;
  want[0][1] += lam;
  want[0][1] -= lam;
  want[0][1] -= lam;
  want[0][2] = invn;
  want[0][2] += lam;
  want[0][2] -= lam;
  want[1][0] = invn;
  want[1][0] -= lam;
  want[1][0] += lam;
  want[1][1] = invn;
  want[1][1] += lam;
  want[1][1] -= lam;
  want[1][1] += lam;
  want[1][2] = invn;
  want[1][2] += lam;
  want[1][2] += lam;
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x)
      CHECK(std::fabs(dpred.data()[y * 3 + x] - want[y][x]) < 1e-16);
}

TEST_CASE("a perfect prediction has an all-zero subgradient") {
  Rng rng(35);
  Tensor<double> gt = random_tensor<double>(1, 5, 7, rng);
  Tensor<double> dpred;
  LossConfig cfg;
  naima::total_loss_backward(gt, gt, cfg, dpred);
  for (std::size_t i = 0; i < dpred.size(); ++i) CHECK(dpred.data()[i] == 0.0);
}

TEST_CASE("the backward pass matches finite differences away from ties") {
  // Alternating-sign offsets keep both |pred - gt| and the gradient
  // differences bounded away from zero, so the loss is smooth around pred.
  Rng rng(36);
  Tensor<double> gt = random_tensor<double>(1, 4, 5, rng, 0.0, 1.0);
  Tensor<double> pred = gt;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) {
      const double mag = 0.1 * (1.0 + ((x * 7 + y * 3) % 5));
      const double sign = ((x + y) % 2 == 0) ? 1.0 : -1.0;
      pred.data()[y * 5 + x] += sign * mag;
    }
  LossConfig cfg;
  cfg.lambda = 0.2;

  Tensor<double> dpred;
  naima::total_loss_backward(pred, gt, cfg, dpred);
  auto loss = [&]() { return naima::total_loss(pred, gt, cfg).total; };
  for (std::size_t i = 0; i < pred.size(); ++i)
    CHECK(rel_err(dpred.data()[i],
                  central_difference(&pred.data()[i], 1e-6, loss), 1e-7) <
          1e-6);
}

TEST_CASE("loss inputs must agree in shape") {
  Tensor<double> a(1, 4, 4), b(1, 4, 5), dpred;
  LossConfig cfg;
  CHECK_THROWS_AS(naima::l1_loss(a, b), naima::ShapeError);
  CHECK_THROWS_AS(naima::gradient_loss(a, b), naima::ShapeError);
  CHECK_THROWS_AS(naima::total_loss(a, b, cfg), naima::ShapeError);
  CHECK_THROWS_AS(naima::total_loss_backward(a, b, cfg, dpred), naima::ShapeError);
}

TEST_CASE("the single-precision instantiation tracks the double one") {
  Rng rng(37);
  Tensor<double> gtd = random_tensor<double>(1, 6, 6, rng, 0.0, 1.0);
  Tensor<double> prd = random_tensor<double>(1, 6, 6, rng, 0.0, 1.0);
  Tensor<float> gtf = gtd.template cast<float>();
  Tensor<float> prf = prd.template cast<float>();
  LossConfig cfg;
  const naima::LossParts pd = naima::total_loss(prd, gtd, cfg);
  const naima::LossParts pf = naima::total_loss(prf, gtf, cfg);
  CHECK(std::fabs(pd.total - pf.total) < 1e-5);
}
