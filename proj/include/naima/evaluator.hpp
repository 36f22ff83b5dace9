#pragma once

#include <string>
#include <vector>

#include "naima/data.hpp"
#include "naima/gta.hpp"
#include "naima/tensor.hpp"

namespace naima {

inline int pad_amount(int dim, int multiple) {
  return (multiple - dim % multiple) % multiple;
}

// Zero padding on the bottom/right edges only, so original pixels keep their
// coordinates and a top-left crop undoes the pad exactly.
template <typename T>
Tensor<T> pad_bottom_right(const Tensor<T>& t, int pad_h, int pad_w);

template <typename T>
Tensor<T> crop_top_left(const Tensor<T>& t, int h, int w);

template <typename T>
struct PaddedPair {
  Tensor<T> rgb;
  Tensor<T> depth;
  int pad_h = 0;
  int pad_w = 0;
};

// Pads the working-resolution pair to the next multiple (the token patch
// size, 14) so the semantic encoder accepts it. Scores are always computed on
// the cropped-back region, never on padding.
template <typename T>
PaddedPair<T> pad_to_multiple(const Tensor<T>& rgb, const Tensor<T>& depth,
                              int multiple = 14);

// 100 * sqrt(mean((a - b)^2)); inputs in meters.
template <typename T>
double rmse_cm(const Tensor<T>& a, const Tensor<T>& b);

struct EvalReport {
  struct Row {
    std::string id;
    double rmse_cm = 0.0;
    double baseline_rmse_cm = 0.0;  // bicubic upsample of the LR input
    int pad_h = 0, pad_w = 0;
  };
  std::vector<Row> per_sample;
  double aggregate_rmse_cm = 0.0;
  double baseline_aggregate_rmse_cm = 0.0;
  int scale = 0;

  std::string csv() const;      // id,rmse_cm
  std::string summary() const;  // human-readable block
};

// Full protocol for one sample: normalization stats from the LR input (GT is
// off-limits at inference), bicubic upsample, pad, forward, crop back,
// residual denormalization to meters.
template <typename T>
Tensor<T> predict_meters(NaimaModel<T>& model, const SamplePair& s,
                         ForwardTrace<T>* trace = nullptr,
                         int* pad_h = nullptr, int* pad_w = nullptr);

template <typename T>
EvalReport evaluate(NaimaModel<T>& model, const std::vector<SamplePair>& samples);

// |pred - gt| heat map with the RMSE stamped in the corner.
template <typename T>
void emit_error_map(const Tensor<T>& pred_m, const Tensor<T>& gt_m,
                    const std::string& path);

// Channel-mean grayscale images of the per-level RGB features and refined
// depth features: <prefix>_level<i>_{rgb,depth}.ppm, eight files.
template <typename T>
void emit_feature_maps(NaimaModel<T>& model, const SamplePair& s,
                       const std::string& prefix);

}  // namespace naima
