#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace naima {

// Flat dotted-key configuration, layered defaults <- file <- overrides.
// File format: one `key = value` per line, '#' comments, blank lines ignored.
class Config {
 public:
  static Config defaults();

  void load_file(const std::string& path);   // overlays onto current values
  // same format from memory; origin appears in error messages
  void load_text(const std::string& text, const std::string& origin);
  void set(const std::string& key, const std::string& value);
  void set_kv(const std::string& assignment);  // "key=value"

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  // full resolved snapshot, sorted keys, one per line
  std::string resolved_text() const;

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::string> kv_;
};

struct ModelConfig {
  int levels = 4;
  int channels = 64;
  int rcab_per_level = 4;
  int reduction = 16;
  int rgb_blocks_per_level = 2;
  int head_rcabs = 2;
  int d_k = 64;
  int max_n = 20000;  // attention position cap: N = H*W may not exceed this
  int scale = 4;
  int embed_dim = 384;
  double alpha_init = 0.0;
  bool raw_qkv = false;
  std::string variant = "naima";       // naima | naima_plus
  std::string encoder_kind = "stub";   // stub | pretrained
  std::string encoder_weights;
  std::uint64_t encoder_seed = 1234;
  std::uint64_t init_seed = 17;

  static ModelConfig from(const Config& c);
  void validate() const;
};

struct LossConfig {
  double lambda = 0.05;
  std::string kind = "l1_grad";  // l1_grad | l1

  static LossConfig from(const Config& c);
};

struct TrainConfig {
  double lr0 = 1e-4;
  double decay_factor = 0.3;
  int decay_every = 50;
  int epochs = 200;
  int batch_size = 1;
  std::uint64_t seed = 0;
  int scale = 4;
  int patch = 0;  // 0 = train on full images, no cropping
  int val_every = 10;

  static TrainConfig from(const Config& c);
  void validate() const;
};

}  // namespace naima
