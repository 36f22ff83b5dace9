#pragma once

#include "naima/config.hpp"
#include "naima/tensor.hpp"

namespace naima {

// Forward-difference spatial gradients. gx[y][x] = d[y][x+1] - d[y][x] with a
// zero last column; gy analogous with a zero last row. Requires a map of at
// least 2x2.
template <typename T>
void spatial_gradients(const Tensor<T>& d, Tensor<T>& gx, Tensor<T>& gy);

// mean |pred - gt| over every entry
template <typename T>
T l1_loss(const Tensor<T>& pred, const Tensor<T>& gt);

// mean |dx pred - dx gt| + mean |dy pred - dy gt|, means over every entry
// (the zeroed border rows/columns contribute zero to the sums but are counted
// in the denominator).
template <typename T>
T gradient_loss(const Tensor<T>& pred, const Tensor<T>& gt);

struct LossParts {
  double total = 0.0;
  double l1 = 0.0;
  double grad = 0.0;  // unweighted gradient term
};

// total = l1 + lambda * grad
template <typename T>
LossParts total_loss(const Tensor<T>& pred, const Tensor<T>& gt,
                     const LossConfig& cfg);

// Overwrites dpred with dL/dpred. Ties in |.| use subgradient 0.
template <typename T>
LossParts total_loss_backward(const Tensor<T>& pred, const Tensor<T>& gt,
                              const LossConfig& cfg, Tensor<T>& dpred);

}  // namespace naima
