#pragma once

#include <cstdint>
#include <cstring>

namespace naima {

// splitmix64: bijective 64-bit mixer. All seeded randomness in this project
// goes through it so results do not depend on the standard library's
// distribution implementations.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Fold extra words into a key; each step keeps the full 64-bit state mixed.
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ v);
}

inline double u64_to_unit(std::uint64_t x) {
  // top 53 bits -> [0, 1)
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// FNV-1a over raw bytes; used to key content-dependent pseudo-randomness.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xCBF29CE484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Small counter-based generator: a stream of splitmix64 outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ = splitmix64(state_);
    return state_;
  }
  // [0, 1)
  double next_unit() { return u64_to_unit(next_u64()); }
  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
  // [0, n)
  int next_below(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  template <typename It>
  void shuffle(It first, It last) {
    auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      auto j = next_u64() % static_cast<std::uint64_t>(i + 1);
      std::swap(first[i], first[static_cast<decltype(i)>(j)]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace naima
