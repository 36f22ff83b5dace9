#pragma once

#include "naima/tensor.hpp"

namespace naima {

// Catmull-Rom bicubic (a = -0.5) resampling with half-pixel centers and
// reflected borders (edge sample not repeated). Downscaling stretches the
// kernel by the scale ratio so it antialiases; weights are renormalized per
// output coordinate, which preserves constants exactly. Internal arithmetic
// is double regardless of T.
template <typename T>
Tensor<T> bicubic_resize(const Tensor<T>& in, int oh, int ow);

// scale >= 2; input dims must be divisible by scale.
template <typename T>
Tensor<T> bicubic_downsample(const Tensor<T>& in, int scale);

// scale >= 2; output dims = input dims * scale.
template <typename T>
Tensor<T> bicubic_upsample(const Tensor<T>& in, int scale);

}  // namespace naima
