#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "naima/error.hpp"
#include "naima/tensor.hpp"

namespace naima {

// Versioned little-endian container of named blobs: float32/float64 tensors
// and raw byte strings. Used for checkpoints and semantic-encoder weights.
// Layout:
//   u32 magic 'NBC1' | u32 version | u32 entry_count | u32 reserved
//   per entry: u32 name_len, name, u32 dtype, u32 c, u32 h, u32 w, payload
// dtype: 0 = f32 tensor, 1 = f64 tensor, 2 = raw bytes (c=h=1, w=length).
class BlobFile {
 public:
  struct Entry {
    std::uint32_t dtype = 2;
    int c = 1, h = 1, w = 0;
    std::vector<unsigned char> bytes;
  };

  template <typename T>
  void put_tensor(const std::string& name, const Tensor<T>& t);
  template <typename T>
  Tensor<T> get_tensor(const std::string& name) const;  // exact dtype match

  void put_bytes(const std::string& name, const std::string& data);
  std::string get_bytes(const std::string& name) const;

  void put_scalar(const std::string& name, double v);
  double get_scalar(const std::string& name) const;

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  // write-temp-then-rename so a crash never leaves a half-written file
  void save(const std::string& path) const;
  static BlobFile load(const std::string& path);

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace naima
