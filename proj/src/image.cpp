#include "naima/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "naima/error.hpp"

namespace naima {

namespace {

constexpr std::uint32_t kGridMagic = 0x3147464Eu;  // "NFG1" little-endian
constexpr std::uint32_t kGridDtypeF32 = 1;

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("short write: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

// Skips netpbm whitespace/comments and parses one decimal token.
int parse_pnm_int(const std::string& s, std::size_t& pos) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
    throw FormatError("expected integer in netpbm header", pos);
  long v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    if (v > 1000000000L) throw FormatError("netpbm header value too large", pos);
    ++pos;
  }
  return static_cast<int>(v);
}

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32le(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
  s.push_back(static_cast<char>((v >> 16) & 0xFF));
  s.push_back(static_cast<char>((v >> 24) & 0xFF));
}

unsigned char quantize8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<unsigned char>(std::lround(c * 255.0f));
}

// 5x7 bitmap glyphs for the annotation stamp; each entry is 7 rows of 5 bits.
struct Glyph {
  char ch;
  std::uint8_t rows[7];
};

const Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
};

const Glyph* find_glyph(char c) {
  for (const auto& g : kFont)
    if (g.ch == c) return &g;
  return nullptr;
}

}  // namespace

void write_ppm(const std::string& path, const TensorF& rgb) {
  if (rgb.channels() != 3) throw ShapeError("write_ppm: want 3 channels, got " + rgb.shape_str());
  const int h = rgb.height(), w = rgb.width();
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        out.push_back(static_cast<char>(quantize8(rgb.at(c, y, x))));
  write_file(path, out);
}

TensorF read_ppm(const std::string& path) {
  const std::string s = read_file(path);
  if (s.size() < 2 || s[0] != 'P' || s[1] != '6')
    throw FormatError("not a P6 ppm: " + path, 0);
  std::size_t pos = 2;
  const int w = parse_pnm_int(s, pos);
  const int h = parse_pnm_int(s, pos);
  const int maxval = parse_pnm_int(s, pos);
  if (maxval != 255) throw FormatError("ppm maxval must be 255", pos);
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (s.size() - pos < need) throw FormatError("ppm payload truncated", s.size());
  TensorF rgb(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        rgb.at(c, y, x) = static_cast<float>(static_cast<unsigned char>(s[pos++])) / 255.0f;
  return rgb;
}

void write_pgm16(const std::string& path, const TensorF& map, double scale) {
  if (map.channels() != 1) throw ShapeError("write_pgm16: want 1 channel, got " + map.shape_str());
  if (scale <= 0.0) throw UsageError("write_pgm16: scale must be positive");
  const int h = map.height(), w = map.width();
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double q = std::clamp(std::round(static_cast<double>(map.at(0, y, x)) / scale), 0.0, 65535.0);
      const auto v = static_cast<std::uint16_t>(q);
      out.push_back(static_cast<char>((v >> 8) & 0xFF));  // big-endian per netpbm
      out.push_back(static_cast<char>(v & 0xFF));
    }
  write_file(path, out);
}

TensorF read_pgm16(const std::string& path, double scale) {
  const std::string s = read_file(path);
  if (s.size() < 2 || s[0] != 'P' || s[1] != '5')
    throw FormatError("not a P5 pgm: " + path, 0);
  std::size_t pos = 2;
  const int w = parse_pnm_int(s, pos);
  const int h = parse_pnm_int(s, pos);
  const int maxval = parse_pnm_int(s, pos);
  if (maxval != 65535) throw FormatError("pgm maxval must be 65535", pos);
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * 2;
  if (s.size() - pos < need) throw FormatError("pgm payload truncated", s.size());
  TensorF map(1, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto hi = static_cast<unsigned char>(s[pos++]);
      const auto lo = static_cast<unsigned char>(s[pos++]);
      map.at(0, y, x) = static_cast<float>(((hi << 8) | lo) * scale);
    }
  return map;
}

void write_f32_grid(const std::string& path, const TensorF& map) {
  if (map.channels() != 1) throw ShapeError("write_f32_grid: want 1 channel, got " + map.shape_str());
  std::string out;
  append_u32le(out, kGridMagic);
  append_u32le(out, kGridDtypeF32);
  append_u32le(out, static_cast<std::uint32_t>(map.height()));
  append_u32le(out, static_cast<std::uint32_t>(map.width()));
  const std::size_t n = map.size();
  out.resize(16 + n * 4);
  std::memcpy(out.data() + 16, map.data(), n * 4);  // little-endian host assumed
  write_file(path, out);
}

TensorF read_f32_grid(const std::string& path) {
  const std::string s = read_file(path);
  if (s.size() < 16) throw FormatError("grid header truncated: " + path, s.size());
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  if (read_u32le(p) != kGridMagic) throw FormatError("bad grid magic: " + path, 0);
  if (read_u32le(p + 4) != kGridDtypeF32) throw FormatError("unsupported grid dtype", 4);
  const auto h = read_u32le(p + 8);
  const auto w = read_u32le(p + 12);
  if (h == 0 || w == 0 || h > 1u << 20 || w > 1u << 20)
    throw FormatError("implausible grid dims", 8);
  const std::size_t need = static_cast<std::size_t>(h) * w * 4;
  if (s.size() - 16 < need) throw FormatError("grid payload truncated", s.size());
  TensorF map(1, static_cast<int>(h), static_cast<int>(w));
  std::memcpy(map.data(), s.data() + 16, need);
  return map;
}

void stamp_text(TensorF& img, int y, int x, const std::string& text,
                float r, float g, float b) {
  int cx = x;
  for (char ch : text) {
    const Glyph* gl = find_glyph(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (gl) {
      for (int gy = 0; gy < 7; ++gy)
        for (int gx = 0; gx < 5; ++gx) {
          if (!(gl->rows[gy] & (1 << (4 - gx)))) continue;
          const int py = y + gy, px = cx + gx;
          if (py < 0 || py >= img.height() || px < 0 || px >= img.width()) continue;
          img.at(0, py, px) = r;
          img.at(1, py, px) = g;
          img.at(2, py, px) = b;
        }
    }
    cx += 6;
  }
}

TensorF render_error_map(const TensorF& pred, const TensorF& gt, double rmse_cm) {
  if (!pred.same_shape(gt) || pred.channels() != 1)
    throw ShapeError("render_error_map: shapes " + pred.shape_str() + " vs " + gt.shape_str());
  const int h = pred.height(), w = pred.width();
  float mx = 0.0f;
  for (std::size_t i = 0; i < pred.size(); ++i)
    mx = std::max(mx, std::fabs(pred.data()[i] - gt.data()[i]));
  const float inv = mx > 0.0f ? 1.0f / mx : 0.0f;
  TensorF img(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float t = std::fabs(pred.at(0, y, x) - gt.at(0, y, x)) * inv;
      // blue (low) -> red (high) through white
      img.at(0, y, x) = std::min(1.0f, 2.0f * t);
      img.at(1, y, x) = 1.0f - std::fabs(2.0f * t - 1.0f);
      img.at(2, y, x) = std::min(1.0f, 2.0f * (1.0f - t)) * 0.9f;
    }
  char label[64];
  std::snprintf(label, sizeof label, "RMSE %.2f CM", rmse_cm);
  stamp_text(img, 2, 2, label, 0.0f, 0.0f, 0.0f);
  return img;
}

TensorF render_grayscale(const TensorF& map) {
  if (map.channels() != 1) throw ShapeError("render_grayscale: want 1 channel");
  float lo = map.data()[0], hi = map.data()[0];
  for (std::size_t i = 0; i < map.size(); ++i) {
    lo = std::min(lo, map.data()[i]);
    hi = std::max(hi, map.data()[i]);
  }
  const float inv = hi > lo ? 1.0f / (hi - lo) : 0.0f;
  TensorF img(3, map.height(), map.width());
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const float v = (map.at(0, y, x) - lo) * inv;
      img.at(0, y, x) = v;
      img.at(1, y, x) = v;
      img.at(2, y, x) = v;
    }
  return img;
}

}  // namespace naima
