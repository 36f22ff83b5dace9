#include "naima/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "naima/error.hpp"

namespace naima {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.set("model.levels", "4");
  c.set("model.channels", "64");
  c.set("model.rcab_per_level", "4");
  c.set("model.reduction", "16");
  c.set("model.rgb_blocks_per_level", "2");
  c.set("model.head_rcabs", "2");
  c.set("model.d_k", "0");  // 0 = follow model.channels
  c.set("model.attention.max_n", "20000");
  c.set("model.attention.raw_qkv", "false");
  c.set("model.alpha_init", "0");
  c.set("model.variant", "naima");
  c.set("model.scale", "4");
  c.set("model.init_seed", "17");
  c.set("semantic_encoder.kind", "stub");
  c.set("semantic_encoder.weights_path", "");
  c.set("semantic_encoder.embed_dim", "384");
  c.set("semantic_encoder.seed", "1234");
  c.set("loss.lambda", "0.05");
  c.set("loss.kind", "l1_grad");
  c.set("train.lr0", "1e-4");
  c.set("train.decay_factor", "0.3");
  c.set("train.decay_every", "50");
  c.set("train.epochs", "200");
  c.set("train.batch_size", "1");
  c.set("train.seed", "0");
  c.set("train.patch", "0");
  c.set("train.val_every", "10");
  return c;
}

void Config::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file: " + path);
  std::ostringstream body;
  body << f.rdbuf();
  load_text(body.str(), path);
}

void Config::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("config " + origin + ":" + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty())
      throw UsageError("config " + origin + ":" + std::to_string(lineno) + ": empty key");
    kv_[key] = val;
  }
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

void Config::set_kv(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("expected key=value, got: " + assignment);
  kv_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

const std::string& Config::raw(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw UsageError("unknown config key: " + key);
  return it->second;
}

std::string Config::get_str(const std::string& key) const { return raw(key); }

int Config::get_int(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    const int r = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return r;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " is not an integer: '" + v + "'");
  }
}

double Config::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return r;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " is not a number: '" + v + "'");
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("config key " + key + " is not a boolean: '" + v + "'");
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t used = 0;
    const unsigned long long r = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return r;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " is not an unsigned integer: '" + v + "'");
  }
}

std::string Config::resolved_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
  return out.str();
}

ModelConfig ModelConfig::from(const Config& c) {
  ModelConfig m;
  m.levels = c.get_int("model.levels");
  m.channels = c.get_int("model.channels");
  m.rcab_per_level = c.get_int("model.rcab_per_level");
  m.reduction = c.get_int("model.reduction");
  m.rgb_blocks_per_level = c.get_int("model.rgb_blocks_per_level");
  m.head_rcabs = c.get_int("model.head_rcabs");
  m.d_k = c.get_int("model.d_k");
  if (m.d_k == 0) m.d_k = m.channels;
  m.max_n = c.get_int("model.attention.max_n");
  m.raw_qkv = c.get_bool("model.attention.raw_qkv");
  m.alpha_init = c.get_double("model.alpha_init");
  m.variant = c.get_str("model.variant");
  m.scale = c.get_int("model.scale");
  m.init_seed = c.get_u64("model.init_seed");
  m.encoder_kind = c.get_str("semantic_encoder.kind");
  m.encoder_weights = c.get_str("semantic_encoder.weights_path");
  m.embed_dim = c.get_int("semantic_encoder.embed_dim");
  m.encoder_seed = c.get_u64("semantic_encoder.seed");
  m.validate();
  return m;
}

void ModelConfig::validate() const {
  if (levels != 4) throw UsageError("model.levels must be 4");
  if (channels <= 0) throw UsageError("model.channels must be positive");
  if (reduction <= 0 || channels % reduction != 0)
    throw UsageError("model.channels must be divisible by model.reduction");
  if (rcab_per_level <= 0) throw UsageError("model.rcab_per_level must be positive");
  if (rgb_blocks_per_level <= 0) throw UsageError("model.rgb_blocks_per_level must be positive");
  if (head_rcabs <= 0) throw UsageError("model.head_rcabs must be positive");
  if (d_k <= 0) throw UsageError("model.d_k must be positive");
  if (max_n <= 0) throw UsageError("model.attention.max_n must be positive");
  if (scale != 4 && scale != 8 && scale != 16)
    throw UsageError("model.scale must be one of 4, 8, 16");
  if (variant != "naima" && variant != "naima_plus")
    throw UsageError("model.variant must be naima or naima_plus");
  if (encoder_kind != "stub" && encoder_kind != "pretrained")
    throw UsageError("semantic_encoder.kind must be stub or pretrained");
  if (embed_dim <= 0) throw UsageError("semantic_encoder.embed_dim must be positive");
  if (raw_qkv && d_k != channels)
    throw UsageError("attention.raw_qkv requires model.d_k == model.channels");
}

LossConfig LossConfig::from(const Config& c) {
  LossConfig l;
  l.lambda = c.get_double("loss.lambda");
  l.kind = c.get_str("loss.kind");
  if (l.lambda < 0) throw UsageError("loss.lambda must be >= 0");
  if (l.kind != "l1_grad" && l.kind != "l1")
    throw UsageError("loss.kind must be l1_grad or l1");
  if (l.kind == "l1") l.lambda = 0.0;
  return l;
}

TrainConfig TrainConfig::from(const Config& c) {
  TrainConfig t;
  t.lr0 = c.get_double("train.lr0");
  t.decay_factor = c.get_double("train.decay_factor");
  t.decay_every = c.get_int("train.decay_every");
  t.epochs = c.get_int("train.epochs");
  t.batch_size = c.get_int("train.batch_size");
  t.seed = c.get_u64("train.seed");
  t.scale = c.get_int("model.scale");
  t.patch = c.get_int("train.patch");
  t.val_every = c.get_int("train.val_every");
  t.validate();
  return t;
}

void TrainConfig::validate() const {
  if (lr0 <= 0) throw UsageError("train.lr0 must be positive");
  if (decay_factor <= 0 || decay_factor > 1)
    throw UsageError("train.decay_factor must be in (0, 1]");
  if (decay_every <= 0) throw UsageError("train.decay_every must be positive");
  if (epochs < 0) throw UsageError("train.epochs must be >= 0");
  if (batch_size != 1) throw UsageError("train.batch_size must be 1");
  if (patch < 0) throw UsageError("train.patch must be >= 0");
  if (patch > 0 && patch % 14 != 0)
    throw UsageError("train.patch must be divisible by 14");
  if (val_every <= 0) throw UsageError("train.val_every must be positive");
}

}  // namespace naima
