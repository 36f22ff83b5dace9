#include "naima/tokens.hpp"

#include <cmath>
#include <cstring>

#include "naima/error.hpp"
#include "naima/rng.hpp"

namespace naima {

namespace {

void check_grid_dims(int h, int w) {
  if (h % 14 != 0 || w % 14 != 0)
    throw ShapeError("token extraction needs dims divisible by 14, got " +
                     std::to_string(h) + "x" + std::to_string(w));
}

// content key from float32 bits, dtype-independent for float-born data
template <typename T>
std::uint64_t image_checksum(const Tensor<T>& rgb) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    const float f = static_cast<float>(rgb.data()[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    h = fnv1a64(&bits, 4, h);
  }
  return h;
}

}  // namespace

template <typename T>
StubTokenProvider<T>::StubTokenProvider(int embed_dim, std::uint64_t seed)
    : embed_dim_(embed_dim), seed_(seed) {
  if (embed_dim <= 0) throw UsageError("embed_dim must be positive");
}

template <typename T>
TokenSet<T> StubTokenProvider<T>::extract(const Tensor<T>& rgb) const {
  if (rgb.channels() != 3) throw ShapeError("extract: want 3-channel rgb");
  check_grid_dims(rgb.height(), rgb.width());
  const int gh = rgb.height() / 14, gw = rgb.width() / 14;
  const std::uint64_t content = image_checksum(rgb);

  TokenSet<T> ts;
  ts.embed_dim = embed_dim_;
  ts.levels.reserve(4);
  std::vector<double> raw(static_cast<std::size_t>(gh) * gw);
  for (int level = 1; level <= 4; ++level) {
    Tensor<T> grid(embed_dim_, gh, gw);
    for (int c = 0; c < embed_dim_; ++c) {
      for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
          std::uint64_t h = hash_combine(seed_, content);
          h = hash_combine(h, static_cast<std::uint64_t>(level));
          h = hash_combine(h, static_cast<std::uint64_t>(c));
          h = hash_combine(h, static_cast<std::uint64_t>(gy));
          h = hash_combine(h, static_cast<std::uint64_t>(gx));
          raw[static_cast<std::size_t>(gy) * gw + gx] = 2.0 * u64_to_unit(h) - 1.0;
        }
      // 3x3 binomial smoothing, reflected borders
      auto ref = [](int i, int n) {
        if (n == 1) return 0;
        if (i < 0) return -i;
        if (i >= n) return 2 * n - 2 - i;
        return i;
      };
      static const double k[3] = {0.25, 0.5, 0.25};
      std::vector<double> tmp(raw.size());
      for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
          double acc = 0.0;
          for (int t = -1; t <= 1; ++t)
            acc += k[t + 1] * raw[static_cast<std::size_t>(gy) * gw + ref(gx + t, gw)];
          tmp[static_cast<std::size_t>(gy) * gw + gx] = acc;
        }
      for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
          double acc = 0.0;
          for (int t = -1; t <= 1; ++t)
            acc += k[t + 1] * tmp[static_cast<std::size_t>(ref(gy + t, gh)) * gw + gx];
          grid.at(c, gy, gx) = static_cast<T>(acc);
        }
    }
    ts.levels.push_back(std::move(grid));
  }
  return ts;
}

template <typename T>
std::uint64_t StubTokenProvider<T>::fingerprint() const {
  return hash_combine(hash_combine(0x57ABull, seed_),
                      static_cast<std::uint64_t>(embed_dim_));
}

template <typename T>
std::unique_ptr<TokenProvider<T>> make_token_provider(
    const std::string& kind, int embed_dim, std::uint64_t seed,
    const std::string& weights_path) {
  if (kind == "stub")
    return std::make_unique<StubTokenProvider<T>>(embed_dim, seed);
  if (kind == "pretrained") {
    if (weights_path.empty())
      throw UsageError("semantic_encoder.weights_path required for pretrained encoder");
    return std::make_unique<VitTokenProvider<T>>(weights_path);
  }
  throw UsageError("unknown semantic_encoder.kind: " + kind);
}

template class StubTokenProvider<float>;
template class StubTokenProvider<double>;
template std::unique_ptr<TokenProvider<float>> make_token_provider<float>(
    const std::string&, int, std::uint64_t, const std::string&);
template std::unique_ptr<TokenProvider<double>> make_token_provider<double>(
    const std::string&, int, std::uint64_t, const std::string&);

}  // namespace naima
