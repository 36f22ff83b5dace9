#include "naima/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "naima/bicubic.hpp"
#include "naima/error.hpp"
#include "naima/image.hpp"

namespace fs = std::filesystem;

namespace naima {

void SamplePair::validate() const {
  if (rgb.channels() != 3 || depth_gt.channels() != 1 || depth_lr.channels() != 1)
    throw ShapeError("sample " + id + ": bad channel counts");
  const int H = rgb.height(), W = rgb.width();
  if (depth_gt.height() != H || depth_gt.width() != W)
    throw ShapeError("sample " + id + ": rgb " + rgb.shape_str() +
                     " vs depth_gt " + depth_gt.shape_str());
  if (scale < 2) throw ShapeError("sample " + id + ": scale must be >= 2");
  if (H % scale != 0 || W % scale != 0)
    throw ShapeError("sample " + id + ": dims not divisible by scale");
  if (depth_lr.height() != H / scale || depth_lr.width() != W / scale)
    throw ShapeError("sample " + id + ": depth_lr dims " + depth_lr.shape_str());
  if (H % 14 != 0 || W % 14 != 0)
    throw ShapeError("sample " + id + ": dims must be divisible by 14");
  for (const TensorF* t : {&depth_gt, &depth_lr})
    for (std::size_t i = 0; i < t->size(); ++i) {
      const float v = t->data()[i];
      if (!std::isfinite(v) || v < 0.0f)
        throw NumericError("sample " + id + ": depth must be finite and >= 0");
    }
}

NormalizationState make_normalization(const SamplePair& s, bool from_gt) {
  const TensorF& d = from_gt ? s.depth_gt : s.depth_lr;
  double lo = d.data()[0], hi = d.data()[0];
  for (std::size_t i = 0; i < d.size(); ++i) {
    lo = std::min(lo, static_cast<double>(d.data()[i]));
    hi = std::max(hi, static_cast<double>(d.data()[i]));
  }
  if (!(hi > lo))
    throw NumericError("sample " + s.id + ": degenerate depth range [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  NormalizationState st;
  st.depth_min = lo;
  st.depth_max = hi;
  return st;
}

template <typename T>
Tensor<T> normalize_rgb(const Tensor<T>& rgb, const NormalizationState& st) {
  if (rgb.channels() != 3) throw ShapeError("normalize_rgb: want 3 channels");
  Tensor<T> out(3, rgb.height(), rgb.width());
  for (int c = 0; c < 3; ++c) {
    if (!(st.rgb_std[c] > 0)) throw NumericError("rgb_std must be positive");
    const T mean = static_cast<T>(st.rgb_mean[c]);
    const T inv = static_cast<T>(1.0 / st.rgb_std[c]);
    const T* src = rgb.plane(c);
    T* dst = out.plane(c);
    const std::size_t n = static_cast<std::size_t>(rgb.height()) * rgb.width();
    for (std::size_t i = 0; i < n; ++i) dst[i] = (src[i] - mean) * inv;
  }
  return out;
}

template <typename T>
Tensor<T> normalize_depth(const Tensor<T>& d, const NormalizationState& st) {
  if (!(st.depth_max > st.depth_min))
    throw NumericError("degenerate depth range in normalization state");
  const T lo = static_cast<T>(st.depth_min);
  const T inv = static_cast<T>(1.0 / (st.depth_max - st.depth_min));
  Tensor<T> out(d.channels(), d.height(), d.width());
  for (std::size_t i = 0; i < d.size(); ++i)
    out.data()[i] = std::clamp((d.data()[i] - lo) * inv, T(0), T(1));
  return out;
}

template <typename T>
Tensor<T> denormalize_depth(const Tensor<T>& d, const NormalizationState& st) {
  const T lo = static_cast<T>(st.depth_min);
  const T range = static_cast<T>(st.depth_max - st.depth_min);
  Tensor<T> out(d.channels(), d.height(), d.width());
  for (std::size_t i = 0; i < d.size(); ++i)
    out.data()[i] = lo + d.data()[i] * range;
  return out;
}

SamplePair normalize_sample(const SamplePair& s, const NormalizationState& st) {
  SamplePair out;
  out.rgb = normalize_rgb(s.rgb, st);
  out.depth_gt = normalize_depth(s.depth_gt, st);
  out.depth_lr = normalize_depth(s.depth_lr, st);
  out.scale = s.scale;
  out.id = s.id;
  return out;
}

SamplePair crop_training_patch(const SamplePair& s, int patch, Rng& rng) {
  const int H = s.rgb.height(), W = s.rgb.width(), sc = s.scale;
  if (patch <= 0 || patch % 14 != 0 || patch % sc != 0)
    throw UsageError("patch size " + std::to_string(patch) +
                     " must be positive and divisible by 14 and by scale");
  if (H < patch || W < patch)
    throw ShapeError("sample " + s.id + " (" + std::to_string(H) + "x" +
                     std::to_string(W) + ") smaller than patch " +
                     std::to_string(patch));
  // offsets aligned to the scale so the LR crop is exact
  const int oy = rng.next_below((H - patch) / sc + 1) * sc;
  const int ox = rng.next_below((W - patch) / sc + 1) * sc;
  SamplePair out;
  out.scale = sc;
  out.id = s.id;
  out.rgb = TensorF(3, patch, patch);
  out.depth_gt = TensorF(1, patch, patch);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < patch; ++y)
      for (int x = 0; x < patch; ++x)
        out.rgb.at(c, y, x) = s.rgb.at(c, oy + y, ox + x);
  for (int y = 0; y < patch; ++y)
    for (int x = 0; x < patch; ++x)
      out.depth_gt.at(0, y, x) = s.depth_gt.at(0, oy + y, ox + x);
  const int lp = patch / sc, ly = oy / sc, lx = ox / sc;
  out.depth_lr = TensorF(1, lp, lp);
  for (int y = 0; y < lp; ++y)
    for (int x = 0; x < lp; ++x)
      out.depth_lr.at(0, y, x) = s.depth_lr.at(0, ly + y, lx + x);
  return out;
}

namespace {

struct Rect {
  int y0, x0, y1, x1;
  double depth;
};

}  // namespace

std::vector<SamplePair> generate_synthetic_dataset(int count, int height,
                                                   int width, int scale,
                                                   std::uint64_t seed) {
  if (count < 0) throw UsageError("count must be >= 0");
  if (height <= 0 || width <= 0 || height % 14 != 0 || width % 14 != 0)
    throw UsageError("dims must be positive and divisible by 14");
  if (scale < 2 || height % scale != 0 || width % scale != 0)
    throw UsageError("dims must be divisible by the scale");

  std::vector<SamplePair> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int si = 0; si < count; ++si) {
    Rng rng(hash_combine(hash_combine(seed, 0xA11CEull), static_cast<std::uint64_t>(si)));
    SamplePair s;
    s.scale = scale;
    {
      char buf[16];
      std::snprintf(buf, sizeof buf, "s%04d", si);
      s.id = buf;
    }

    // depth: base plane plus 3..6 occluding rectangles, sharp boundaries
    const double base = rng.uniform(1.5, 4.0);
    std::vector<Rect> rects;
    const int nrects = 3 + rng.next_below(4);
    for (int r = 0; r < nrects; ++r) {
      const int ry = rng.next_below(height), rx = rng.next_below(width);
      const int rh = 4 + rng.next_below(std::max(1, height / 2));
      const int rw = 4 + rng.next_below(std::max(1, width / 2));
      rects.push_back({ry, rx, std::min(height, ry + rh), std::min(width, rx + rw),
                       rng.uniform(0.5, 5.0)});
    }
    s.depth_gt = TensorF(1, height, width);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double d = base;
        for (const Rect& r : rects)
          if (y >= r.y0 && y < r.y1 && x >= r.x0 && x < r.x1) d = r.depth;
        s.depth_gt.at(0, y, x) = static_cast<float>(d);
      }

    // rgb: depth shading + texture that crosses depth boundaries
    const double fy = rng.uniform(0.05, 0.45), fx = rng.uniform(0.05, 0.45);
    const double phase = rng.uniform(0.0, 6.28318530717958647692);
    std::vector<Rect> patches;  // texture patches, independent of depth rects
    const int npatch = 2 + rng.next_below(3);
    std::vector<std::array<double, 3>> tints;
    for (int r = 0; r < npatch; ++r) {
      const int ry = rng.next_below(height), rx = rng.next_below(width);
      const int rh = 6 + rng.next_below(std::max(1, height / 2));
      const int rw = 6 + rng.next_below(std::max(1, width / 2));
      patches.push_back({ry, rx, std::min(height, ry + rh), std::min(width, rx + rw), 0.0});
      tints.push_back({rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
    }
    double dmin = 5.0, dmax = 0.0;
    for (std::size_t i = 0; i < s.depth_gt.size(); ++i) {
      dmin = std::min(dmin, static_cast<double>(s.depth_gt.data()[i]));
      dmax = std::max(dmax, static_cast<double>(s.depth_gt.data()[i]));
    }
    const double dinv = dmax > dmin ? 1.0 / (dmax - dmin) : 0.0;
    s.rgb = TensorF(3, height, width);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double shade =
            0.25 + 0.5 * (1.0 - (s.depth_gt.at(0, y, x) - dmin) * dinv);
        const double stripe = 0.18 * std::sin(fy * y + fx * x + phase);
        double col[3] = {shade + stripe, shade + stripe, shade + stripe};
        for (std::size_t r = 0; r < patches.size(); ++r) {
          const Rect& p = patches[r];
          if (y >= p.y0 && y < p.y1 && x >= p.x0 && x < p.x1)
            for (int c = 0; c < 3; ++c) col[c] += tints[r][c];
        }
        for (int c = 0; c < 3; ++c) {
          const double q = std::clamp(col[c], 0.0, 1.0);
          // quantize to 8 bits so disk round-trips are exact
          s.rgb.at(c, y, x) = static_cast<float>(std::lround(q * 255.0) / 255.0);
        }
      }

    s.depth_lr = bicubic_downsample(s.depth_gt, scale);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::map<std::string, std::string> read_meta(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(f, line)) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

void save_dataset(const std::string& root, const std::string& split,
                  const std::vector<SamplePair>& samples) {
  const fs::path dir = fs::path(root) / split;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const SamplePair& s : samples) {
    const std::string stem = (dir / s.id).string();
    write_ppm(stem + "_rgb.ppm", s.rgb);
    write_pgm16(stem + "_depth.pgm", s.depth_gt, 0.001);
    write_f32_grid(stem + "_depth.f32", s.depth_gt);
    std::ofstream meta(stem + "_meta");
    if (!meta) throw IoError("cannot write " + stem + "_meta");
    meta << "depth_scale_mm=1\n"
         << "width=" << s.rgb.width() << "\n"
         << "height=" << s.rgb.height() << "\n"
         << "scale=" << s.scale << "\n";
  }
}

std::vector<SamplePair> load_dataset(const std::string& root,
                                     const std::string& split) {
  const fs::path dir = fs::path(root) / split;
  if (!fs::is_directory(dir))
    throw UsageError("dataset directory not found: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = "_meta";
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw UsageError("no samples in " + dir.string());

  std::vector<SamplePair> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    const std::string stem = (dir / id).string();
    const auto meta = read_meta(stem + "_meta");
    SamplePair s;
    s.id = id;
    s.scale = std::stoi(meta.at("scale"));
    s.rgb = read_ppm(stem + "_rgb.ppm");
    if (fs::exists(stem + "_depth.f32")) {
      s.depth_gt = read_f32_grid(stem + "_depth.f32");
    } else {
      const double mm = std::stod(meta.at("depth_scale_mm"));
      s.depth_gt = read_pgm16(stem + "_depth.pgm", mm * 0.001);
    }
    // derive LR from GT so the degradation invariant holds regardless of
    // how the files were produced
    s.depth_lr = bicubic_downsample(s.depth_gt, s.scale);
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

template Tensor<float> normalize_rgb(const Tensor<float>&, const NormalizationState&);
template Tensor<double> normalize_rgb(const Tensor<double>&, const NormalizationState&);
template Tensor<float> normalize_depth(const Tensor<float>&, const NormalizationState&);
template Tensor<double> normalize_depth(const Tensor<double>&, const NormalizationState&);
template Tensor<float> denormalize_depth(const Tensor<float>&, const NormalizationState&);
template Tensor<double> denormalize_depth(const Tensor<double>&, const NormalizationState&);

}  // namespace naima
