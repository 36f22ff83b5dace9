#include "naima/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "naima/bicubic.hpp"
#include "naima/error.hpp"
#include "naima/image.hpp"

namespace naima {

template <typename T>
Tensor<T> pad_bottom_right(const Tensor<T>& t, int pad_h, int pad_w) {
  if (pad_h < 0 || pad_w < 0) throw ShapeError("negative padding");
  if (pad_h == 0 && pad_w == 0) return t;
  Tensor<T> out(t.channels(), t.height() + pad_h, t.width() + pad_w);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < t.height(); ++y)
      std::memcpy(out.plane(c) + static_cast<std::size_t>(y) * out.width(),
                  t.plane(c) + static_cast<std::size_t>(y) * t.width(),
                  sizeof(T) * t.width());
  out.role = t.role;
  return out;
}

template <typename T>
Tensor<T> crop_top_left(const Tensor<T>& t, int h, int w) {
  if (h > t.height() || w > t.width())
    throw ShapeError("crop " + std::to_string(h) + "x" + std::to_string(w) +
                     " exceeds " + t.shape_str());
  if (h == t.height() && w == t.width()) return t;
  Tensor<T> out(t.channels(), h, w);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < h; ++y)
      std::memcpy(out.plane(c) + static_cast<std::size_t>(y) * w,
                  t.plane(c) + static_cast<std::size_t>(y) * t.width(),
                  sizeof(T) * w);
  out.role = t.role;
  return out;
}

template <typename T>
PaddedPair<T> pad_to_multiple(const Tensor<T>& rgb, const Tensor<T>& depth,
                              int multiple) {
  if (rgb.height() != depth.height() || rgb.width() != depth.width())
    throw ShapeError("pad inputs differ: " + rgb.shape_str() + " vs " +
                     depth.shape_str());
  PaddedPair<T> out;
  out.pad_h = pad_amount(rgb.height(), multiple);
  out.pad_w = pad_amount(rgb.width(), multiple);
  out.rgb = pad_bottom_right(rgb, out.pad_h, out.pad_w);
  out.depth = pad_bottom_right(depth, out.pad_h, out.pad_w);
  return out;
}

template <typename T>
double rmse_cm(const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b))
    throw ShapeError("rmse inputs differ: " + a.shape_str() + " vs " +
                     b.shape_str());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d =
        static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
    acc += d * d;
  }
  return 100.0 * std::sqrt(acc / static_cast<double>(a.size()));
}

template <typename T>
Tensor<T> predict_meters(NaimaModel<T>& model, const SamplePair& s,
                         ForwardTrace<T>* trace, int* pad_h, int* pad_w) {
  // Runtime (not usage) error: the checkpoint and the dataset each declare a
  // scale, and they disagree.
  if (s.scale != model.config().scale)
    throw Error("sample " + s.id + " has scale " + std::to_string(s.scale) +
                " but the model was configured for scale " +
                std::to_string(model.config().scale));
  const NormalizationState st = make_normalization(s, /*from_gt=*/false);
  const double range = st.depth_max - st.depth_min;

  const Tensor<T> rgb_n = normalize_rgb(s.rgb.cast<T>(), st);
  const Tensor<T> lr_m = s.depth_lr.cast<T>();
  const Tensor<T> d_up_n = bicubic_upsample(normalize_depth(lr_m, st), s.scale);
  const Tensor<T> d_up_m = bicubic_upsample(lr_m, s.scale);

  PaddedPair<T> p = pad_to_multiple(rgb_n, d_up_n, 14);
  if (pad_h) *pad_h = p.pad_h;
  if (pad_w) *pad_w = p.pad_w;

  const Tensor<T> pred_pad = model.forward_hr(p.rgb, p.depth, false, trace);
  const Tensor<T> pred_n = crop_top_left(pred_pad, rgb_n.height(), rgb_n.width());

  // Residual form: the skip connection's meters-domain value plus the scaled
  // normalized residual. An identity network reproduces the bicubic baseline
  // bit for bit, with no round trip through the normalization.
  Tensor<T> pred_m = d_up_m;
  for (std::size_t i = 0; i < pred_m.size(); ++i)
    pred_m.data()[i] += static_cast<T>(
        range * (static_cast<double>(pred_n.data()[i]) -
                 static_cast<double>(d_up_n.data()[i])));
  pred_m.role = Role::depth_hr;
  return pred_m;
}

template <typename T>
EvalReport evaluate(NaimaModel<T>& model, const std::vector<SamplePair>& samples) {
  if (samples.empty()) throw UsageError("evaluation dataset is empty");
  EvalReport rep;
  rep.scale = model.config().scale;
  double acc = 0.0, acc_base = 0.0;
  for (const SamplePair& s : samples) {
    EvalReport::Row row;
    row.id = s.id;
    const Tensor<T> pred_m = predict_meters<T>(
        model, s, static_cast<ForwardTrace<T>*>(nullptr), &row.pad_h, &row.pad_w);
    const Tensor<T> gt_m = s.depth_gt.cast<T>();
    row.rmse_cm = rmse_cm(pred_m, gt_m);
    row.baseline_rmse_cm =
        rmse_cm(bicubic_upsample(s.depth_lr.cast<T>(), s.scale), gt_m);
    acc += row.rmse_cm;
    acc_base += row.baseline_rmse_cm;
    rep.per_sample.push_back(std::move(row));
  }
  rep.aggregate_rmse_cm = acc / static_cast<double>(rep.per_sample.size());
  rep.baseline_aggregate_rmse_cm =
      acc_base / static_cast<double>(rep.per_sample.size());
  return rep;
}

std::string EvalReport::csv() const {
  std::ostringstream out;
  out << "id,rmse_cm\n";
  char buf[64];
  for (const Row& r : per_sample) {
    std::snprintf(buf, sizeof buf, "%.6f", r.rmse_cm);
    out << r.id << "," << buf << "\n";
  }
  return out.str();
}

std::string EvalReport::summary() const {
  std::ostringstream out;
  char buf[128];
  out << "samples: " << per_sample.size() << "\n";
  out << "scale: " << scale << "\n";
  std::snprintf(buf, sizeof buf, "aggregate_rmse_cm: %.6f\n", aggregate_rmse_cm);
  out << buf;
  std::snprintf(buf, sizeof buf, "bicubic_baseline_rmse_cm: %.6f\n",
                baseline_aggregate_rmse_cm);
  out << buf;
  for (const Row& r : per_sample) {
    std::snprintf(buf, sizeof buf, "  %s: %.6f (baseline %.6f, pad %dx%d)\n",
                  r.id.c_str(), r.rmse_cm, r.baseline_rmse_cm, r.pad_h, r.pad_w);
    out << buf;
  }
  return out.str();
}

template <typename T>
void emit_error_map(const Tensor<T>& pred_m, const Tensor<T>& gt_m,
                    const std::string& path) {
  const double rmse = rmse_cm(pred_m, gt_m);
  write_ppm(path, render_error_map(pred_m.template cast<float>(),
                                   gt_m.template cast<float>(), rmse));
}

namespace {

template <typename T>
TensorF channel_mean_image(const Tensor<T>& t) {
  TensorF out(1, t.height(), t.width());
  const std::size_t plane = static_cast<std::size_t>(t.height()) * t.width();
  for (std::size_t i = 0; i < plane; ++i) {
    double acc = 0.0;
    for (int c = 0; c < t.channels(); ++c)
      acc += static_cast<double>(t.plane(c)[i]);
    out.data()[i] = static_cast<float>(acc / t.channels());
  }
  return out;
}

}  // namespace

template <typename T>
void emit_feature_maps(NaimaModel<T>& model, const SamplePair& s,
                       const std::string& prefix) {
  ForwardTrace<T> trace;
  predict_meters(model, s, &trace, nullptr, nullptr);
  for (int i = 0; i < static_cast<int>(trace.d.size()); ++i) {
    const std::string level = "_level" + std::to_string(i + 1);
    write_ppm(prefix + level + "_rgb.ppm",
              render_grayscale(channel_mean_image(trace.rgb_taps[i])));
    write_ppm(prefix + level + "_depth.ppm",
              render_grayscale(channel_mean_image(trace.d[i])));
  }
}

#define NAIMA_INSTANTIATE_EVAL(T)                                              \
  template Tensor<T> pad_bottom_right<T>(const Tensor<T>&, int, int);          \
  template Tensor<T> crop_top_left<T>(const Tensor<T>&, int, int);             \
  template struct PaddedPair<T>;                                               \
  template PaddedPair<T> pad_to_multiple<T>(const Tensor<T>&, const Tensor<T>&, \
                                            int);                              \
  template double rmse_cm<T>(const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> predict_meters<T>(NaimaModel<T>&, const SamplePair&,      \
                                       ForwardTrace<T>*, int*, int*);          \
  template EvalReport evaluate<T>(NaimaModel<T>&,                              \
                                  const std::vector<SamplePair>&);             \
  template void emit_error_map<T>(const Tensor<T>&, const Tensor<T>&,          \
                                  const std::string&);                         \
  template void emit_feature_maps<T>(NaimaModel<T>&, const SamplePair&,        \
                                     const std::string&);

NAIMA_INSTANTIATE_EVAL(float)
NAIMA_INSTANTIATE_EVAL(double)

#undef NAIMA_INSTANTIATE_EVAL

}  // namespace naima
