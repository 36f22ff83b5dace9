#include "naima/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace naima {

namespace {

constexpr std::uint32_t kMagic = 0x3143424Eu;  // "NBC1"
constexpr std::uint32_t kVersion = 1;

void append_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
  s.push_back(static_cast<char>((v >> 16) & 0xFF));
  s.push_back(static_cast<char>((v >> 24) & 0xFF));
}

struct Reader {
  const unsigned char* p;
  std::size_t n;
  std::size_t pos = 0;

  std::uint32_t u32(const char* what) {
    if (n - pos < 4) throw FormatError(std::string("truncated reading ") + what, pos);
    std::uint32_t v = static_cast<std::uint32_t>(p[pos]) |
                      (static_cast<std::uint32_t>(p[pos + 1]) << 8) |
                      (static_cast<std::uint32_t>(p[pos + 2]) << 16) |
                      (static_cast<std::uint32_t>(p[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  const unsigned char* bytes(std::size_t len, const char* what) {
    if (n - pos < len) throw FormatError(std::string("truncated reading ") + what, pos);
    const unsigned char* q = p + pos;
    pos += len;
    return q;
  }
};

template <typename T>
constexpr std::uint32_t dtype_code() {
  return sizeof(T) == 4 ? 0u : 1u;
}

}  // namespace

template <typename T>
void BlobFile::put_tensor(const std::string& name, const Tensor<T>& t) {
  Entry e;
  e.dtype = dtype_code<T>();
  e.c = t.channels();
  e.h = t.height();
  e.w = t.width();
  e.bytes.resize(t.size() * sizeof(T));
  std::memcpy(e.bytes.data(), t.data(), e.bytes.size());
  entries_[name] = std::move(e);
}

template <typename T>
Tensor<T> BlobFile::get_tensor(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw FormatError("missing entry: " + name, 0);
  const Entry& e = it->second;
  if (e.dtype != dtype_code<T>())
    throw FormatError("dtype mismatch for entry: " + name, 0);
  Tensor<T> t(e.c, e.h, e.w);
  std::memcpy(t.data(), e.bytes.data(), e.bytes.size());
  return t;
}

void BlobFile::put_bytes(const std::string& name, const std::string& data) {
  Entry e;
  e.dtype = 2;
  e.w = static_cast<int>(data.size());
  e.bytes.assign(data.begin(), data.end());
  entries_[name] = std::move(e);
}

std::string BlobFile::get_bytes(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw FormatError("missing entry: " + name, 0);
  if (it->second.dtype != 2) throw FormatError("entry is not raw bytes: " + name, 0);
  return std::string(it->second.bytes.begin(), it->second.bytes.end());
}

void BlobFile::put_scalar(const std::string& name, double v) {
  Tensor<double> t(1, 1, 1);
  t.data()[0] = v;
  put_tensor(name, t);
}

double BlobFile::get_scalar(const std::string& name) const {
  return get_tensor<double>(name).data()[0];
}

void BlobFile::save(const std::string& path) const {
  std::string out;
  append_u32(out, kMagic);
  append_u32(out, kVersion);
  append_u32(out, static_cast<std::uint32_t>(entries_.size()));
  append_u32(out, 0);
  for (const auto& [name, e] : entries_) {
    append_u32(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    append_u32(out, e.dtype);
    append_u32(out, static_cast<std::uint32_t>(e.c));
    append_u32(out, static_cast<std::uint32_t>(e.h));
    append_u32(out, static_cast<std::uint32_t>(e.w));
    out.append(reinterpret_cast<const char*>(e.bytes.data()), e.bytes.size());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f) throw IoError("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename failed: " + tmp + " -> " + path);
}

BlobFile BlobFile::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{reinterpret_cast<const unsigned char*>(s.data()), s.size()};
  if (r.u32("magic") != kMagic) throw FormatError("bad container magic: " + path, 0);
  const auto version = r.u32("version");
  if (version != kVersion)
    throw FormatError("unsupported container version " + std::to_string(version), 4);
  const auto count = r.u32("entry count");
  r.u32("reserved");
  BlobFile bf;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.u32("name length");
    if (name_len > 4096) throw FormatError("implausible name length", r.pos - 4);
    const auto* np = r.bytes(name_len, "name");
    std::string name(reinterpret_cast<const char*>(np), name_len);
    Entry e;
    e.dtype = r.u32("dtype");
    if (e.dtype > 2) throw FormatError("unknown dtype for entry " + name, r.pos - 4);
    e.c = static_cast<int>(r.u32("c"));
    e.h = static_cast<int>(r.u32("h"));
    e.w = static_cast<int>(r.u32("w"));
    if (e.c < 0 || e.h < 0 || e.w < 0 ||
        (e.dtype != 2 && (e.c == 0 || e.h == 0 || e.w == 0)))
      throw FormatError("bad dims for entry " + name, r.pos - 12);
    const std::size_t elem = e.dtype == 0 ? 4 : (e.dtype == 1 ? 8 : 1);
    const std::size_t len = static_cast<std::size_t>(e.c) * e.h * e.w * elem;
    const auto* dp = r.bytes(len, ("payload of " + name).c_str());
    e.bytes.assign(dp, dp + len);
    bf.entries_[name] = std::move(e);
  }
  if (r.pos != r.n) throw FormatError("trailing bytes after last entry", r.pos);
  return bf;
}

template void BlobFile::put_tensor(const std::string&, const Tensor<float>&);
template void BlobFile::put_tensor(const std::string&, const Tensor<double>&);
template Tensor<float> BlobFile::get_tensor(const std::string&) const;
template Tensor<double> BlobFile::get_tensor(const std::string&) const;

}  // namespace naima
