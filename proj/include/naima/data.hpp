#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "naima/rng.hpp"
#include "naima/tensor.hpp"

namespace naima {

// One training/eval record. rgb in [0,1], depth in meters. Storage is float;
// cast to the working dtype at the training/eval boundary.
struct SamplePair {
  TensorF rgb;       // 3 x H x W
  TensorF depth_gt;  // 1 x H x W
  TensorF depth_lr;  // 1 x H/s x W/s
  int scale = 4;
  std::string id;

  void validate() const;  // dims, divisibility, finiteness, depth >= 0
};

struct NormalizationState {
  double depth_min = 0.0;
  double depth_max = 1.0;
  std::array<double, 3> rgb_mean{0.485, 0.456, 0.406};
  std::array<double, 3> rgb_std{0.229, 0.224, 0.225};
};

// from_gt: use GT depth for the min/max (training); otherwise the LR depth
// (inference, where GT is unavailable).
NormalizationState make_normalization(const SamplePair& s, bool from_gt);

SamplePair normalize_sample(const SamplePair& s, const NormalizationState& st);

// Tensor-level helpers so the model can run at any precision.
template <typename T>
Tensor<T> normalize_rgb(const Tensor<T>& rgb, const NormalizationState& st);
template <typename T>
Tensor<T> normalize_depth(const Tensor<T>& d, const NormalizationState& st);
template <typename T>
Tensor<T> denormalize_depth(const Tensor<T>& d, const NormalizationState& st);

// HR crop of patch x patch at an offset that is a multiple of the scale, so
// the LR crop is exact. patch must divide cleanly: patch % 14 == 0 and
// patch % s == 0. Offsets drawn from rng.
SamplePair crop_training_patch(const SamplePair& s, int patch, Rng& rng);

// Piecewise-constant depth planes with sharp boundaries; RGB carries shading
// plus texture that deliberately crosses depth boundaries (misleading color
// cues). Pure function of its arguments; depth_lr = bicubic_downsample(gt).
std::vector<SamplePair> generate_synthetic_dataset(int count, int height,
                                                   int width, int scale,
                                                   std::uint64_t seed);

// Directory layout: <root>/<split>/<id>_rgb.ppm, <id>_depth.pgm (16-bit,
// millimeters), <id>_depth.f32 (lossless), <id>_meta (key=value text).
void save_dataset(const std::string& root, const std::string& split,
                  const std::vector<SamplePair>& samples);
std::vector<SamplePair> load_dataset(const std::string& root,
                                     const std::string& split);

}  // namespace naima
