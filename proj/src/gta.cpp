#include "naima/gta.hpp"

#include <cstdio>
#include <cstring>
#include <utility>

#include "naima/bicubic.hpp"
#include "naima/error.hpp"
#include "naima/kernels.hpp"
#include "naima/rng.hpp"

namespace naima {

// ---------------------------------------------------------------- TokenAlign

template <typename T>
Tensor<T> TokenAlign<T>::forward(const Tensor<T>& s, int target_h, int target_w) {
  if (s.channels() % (r_ * r_) != 0)
    throw ShapeError("token channels " + std::to_string(s.channels()) +
                     " not divisible by r^2 = " + std::to_string(r_ * r_));
  sc_ = s.channels();
  sh_ = s.height();
  sw_ = s.width();
  const int c = sc_ / (r_ * r_);
  Tensor<T> mid(c, sh_ * r_, sw_ * r_);
  kernels::pixel_shuffle_forward(s.data(), c, sh_, sw_, r_, mid.data());
  Tensor<T> out(c, target_h, target_w);
  kernels::bilinear_resize_forward(mid.data(), c, mid.height(), mid.width(),
                                   target_h, target_w, out.data());
  out.role = Role::aligned_tokens;
  return out;
}

template <typename T>
Tensor<T> TokenAlign<T>::backward(const Tensor<T>& df) {
  const int c = sc_ / (r_ * r_);
  if (df.channels() != c) throw ShapeError("token-align backward channel mismatch");
  Tensor<T> dmid(c, sh_ * r_, sw_ * r_);
  kernels::bilinear_resize_backward(df.data(), c, dmid.height(), dmid.width(),
                                    df.height(), df.width(), dmid.data());
  Tensor<T> ds(sc_, sh_, sw_);
  kernels::pixel_shuffle_backward(dmid.data(), c, sh_, sw_, r_, ds.data());
  return ds;
}

// ------------------------------------------------------------ CrossAttention

template <typename T>
CrossAttention<T>::CrossAttention(const std::string& name, int channels, int d_k,
                                  double alpha_init, bool raw_qkv, int max_n)
    : channels_(channels),
      d_k_(d_k),
      max_n_(max_n),
      raw_qkv_(raw_qkv),
      wq_(name + ".wq", 1, d_k, channels),
      wk_(name + ".wk", 1, d_k, channels),
      wv_(name + ".wv", 1, channels, channels),
      alpha_(name + ".alpha", 1, 1, 1) {
  if (raw_qkv_ && d_k_ != channels_)
    throw UsageError("raw_qkv attention requires d_k == channels");
  alpha_.value.data()[0] = static_cast<T>(alpha_init);
}

template <typename T>
void CrossAttention<T>::init(Rng& rng) {
  const double sd = std::sqrt(1.0 / channels_);
  for (std::size_t i = 0; i < wq_.value.size(); ++i)
    wq_.value.data()[i] = static_cast<T>(sd * normal(rng));
  for (std::size_t i = 0; i < wk_.value.size(); ++i)
    wk_.value.data()[i] = static_cast<T>(sd * normal(rng));
  for (std::size_t i = 0; i < wv_.value.size(); ++i)
    wv_.value.data()[i] = static_cast<T>(sd * normal(rng));
}

template <typename T>
Tensor<T> CrossAttention<T>::forward(const Tensor<T>& e, const Tensor<T>& f,
                                     bool store_attn) {
  if (e.channels() != channels_)
    throw ShapeError("attention expects " + std::to_string(channels_) +
                     " channels, got " + e.shape_str());
  if (!e.same_shape(f))
    throw ShapeError("attention query/key grids differ: " + e.shape_str() +
                     " vs " + f.shape_str());
  const int h = e.height(), w = e.width();
  const int n = h * w;
  if (n > max_n_)
    throw UsageError("attention grid " + std::to_string(h) + "x" +
                     std::to_string(w) + " has " + std::to_string(n) +
                     " positions, over the limit of " + std::to_string(max_n_) +
                     " (model.attention.max_n)");

  // Channel planes of a C x H x W tensor are exactly a C x N row-major
  // matrix, so E and F feed the GEMMs without reshaping.
  Tensor<T> q(1, n, d_k_);
  Tensor<T> kt(1, d_k_, n);
  Tensor<T> vt(1, channels_, n);
  if (raw_qkv_) {
    kernels::transpose(e.data(), channels_, n, q.data());
    std::memcpy(kt.data(), f.data(), sizeof(T) * f.size());
    std::memcpy(vt.data(), f.data(), sizeof(T) * f.size());
  } else {
    Tensor<T> qt(1, d_k_, n);
    kernels::gemm_nn(d_k_, channels_, n, wq_.value.data(), e.data(), qt.data());
    kernels::transpose(qt.data(), d_k_, n, q.data());
    kernels::gemm_nn(d_k_, channels_, n, wk_.value.data(), f.data(), kt.data());
    kernels::gemm_nn(channels_, channels_, n, wv_.value.data(), f.data(), vt.data());
  }

  Tensor<T> y(1, n, channels_);
  T* attn_ptr = nullptr;
  if (store_attn) {
    attn_ = Tensor<T>(1, n, n);
    attn_ptr = attn_.data();
  }
  const int bad = kernels::attention_forward(q.data(), kt.data(), vt.data(), n,
                                             d_k_, channels_, attn_ptr, y.data());
  if (bad > 0)
    throw NumericError("non-finite attention logits in " +
                       std::to_string(bad) + " of " + std::to_string(n) + " rows");

  yt_ = Tensor<T>(channels_, h, w);
  kernels::transpose(y.data(), n, channels_, yt_.data());

  Tensor<T> out = e;
  kernels::axpy(alpha_.value.data()[0], yt_.data(), out.data(), out.size());
  out.role = Role::injected_depth;

  has_attn_ = store_attn;
  if (store_attn) {
    e_ = e;
    f_ = f;
    q_ = std::move(q);
    kt_ = std::move(kt);
    vt_ = std::move(vt);
  }
  return out;
}

template <typename T>
void CrossAttention<T>::backward(const Tensor<T>& dout, Tensor<T>& de,
                                 Tensor<T>& df) {
  if (!has_attn_)
    throw Error("attention backward requires a forward pass with store_attn");
  const int n = e_.height() * e_.width();
  const std::size_t sz = e_.size();

  // D* = E + alpha * Y
  kernels::axpy(T(1), dout.data(), de.data(), sz);
  alpha_.grad.data()[0] += kernels::dot(dout.data(), yt_.data(), sz);

  Tensor<T> dyt(channels_, e_.height(), e_.width());
  kernels::axpy(alpha_.value.data()[0], dout.data(), dyt.data(), sz);
  Tensor<T> dy(1, n, channels_);
  kernels::transpose(dyt.data(), channels_, n, dy.data());

  Tensor<T> dq(1, n, d_k_);
  Tensor<T> dkt(1, d_k_, n);
  Tensor<T> dvt(1, channels_, n);
  kernels::attention_backward(q_.data(), kt_.data(), vt_.data(), attn_.data(),
                              dy.data(), n, d_k_, channels_, dq.data(),
                              dkt.data(), dvt.data());

  if (raw_qkv_) {
    Tensor<T> dqt(1, channels_, n);
    kernels::transpose(dq.data(), n, channels_, dqt.data());
    kernels::axpy(T(1), dqt.data(), de.data(), sz);
    kernels::axpy(T(1), dkt.data(), df.data(), sz);
    kernels::axpy(T(1), dvt.data(), df.data(), sz);
  } else {
    Tensor<T> dqt(1, d_k_, n);
    kernels::transpose(dq.data(), n, d_k_, dqt.data());
    kernels::gemm_nt(d_k_, n, channels_, dqt.data(), e_.data(), wq_.grad.data());
    kernels::gemm_tn(channels_, d_k_, n, wq_.value.data(), dqt.data(), de.data());
    kernels::gemm_nt(d_k_, n, channels_, dkt.data(), f_.data(), wk_.grad.data());
    kernels::gemm_tn(channels_, d_k_, n, wk_.value.data(), dkt.data(), df.data());
    kernels::gemm_nt(channels_, n, channels_, dvt.data(), f_.data(), wv_.grad.data());
    kernels::gemm_tn(channels_, channels_, n, wv_.value.data(), dvt.data(), df.data());
  }
}

template <typename T>
void CrossAttention<T>::collect(std::vector<Parameter<T>*>& out) {
  if (!raw_qkv_) {
    out.push_back(&wq_);
    out.push_back(&wk_);
    out.push_back(&wv_);
  }
  out.push_back(&alpha_);
}

template <typename T>
const Tensor<T>& CrossAttention<T>::attention_matrix() const {
  if (!has_attn_) throw Error("no stored attention matrix");
  return attn_;
}

template <typename T>
void CrossAttention<T>::release_cache() {
  attn_ = Tensor<T>();
  e_ = f_ = q_ = kt_ = vt_ = Tensor<T>();
  has_attn_ = false;
}

// ------------------------------------------------------------------ FuseRgb

template <typename T>
FuseRgb<T>::FuseRgb(const std::string& name, int channels, int reduction)
    : mix_(name + ".mix", 2 * channels, channels, 1),
      rcab_(name + ".rcab", channels, reduction),
      channels_(channels) {}

template <typename T>
void FuseRgb<T>::init(Rng& rng) {
  // damped: the fusion branch rides on the per-level carry
  mix_.init(rng, 0.1 * std::sqrt(2.0 / mix_.in_ch()));
  rcab_.init(rng);
}

template <typename T>
void FuseRgb<T>::zero_residual() {
  mix_.zero_weights();
  rcab_.zero_residual();
}

template <typename T>
Tensor<T> FuseRgb<T>::forward(const Tensor<T>& dstar, const Tensor<T>& r) {
  if (!dstar.same_shape(r))
    throw ShapeError("fusion inputs differ: " + dstar.shape_str() + " vs " +
                     r.shape_str());
  const int h = dstar.height(), w = dstar.width();
  Tensor<T> z(2 * channels_, h, w);
  std::memcpy(z.data(), dstar.data(), sizeof(T) * dstar.size());
  std::memcpy(z.data() + dstar.size(), r.data(), sizeof(T) * r.size());
  const Tensor<T>& u = mix_.forward(z);
  const Tensor<T>& v = rcab_.forward(u);
  Tensor<T> y = dstar;
  kernels::axpy(T(1), v.data(), y.data(), y.size());
  y.role = Role::refined_depth;
  return y;
}

template <typename T>
void FuseRgb<T>::backward(const Tensor<T>& dout, Tensor<T>& ddstar,
                          Tensor<T>& dr) {
  Tensor<T> du(channels_, dout.height(), dout.width());
  rcab_.backward(dout, du);
  Tensor<T> dz(2 * channels_, dout.height(), dout.width());
  mix_.backward(du, &dz);
  const std::size_t half = ddstar.size();
  kernels::axpy(T(1), dout.data(), ddstar.data(), half);
  kernels::axpy(T(1), dz.data(), ddstar.data(), half);
  kernels::axpy(T(1), dz.data() + half, dr.data(), half);
}

template <typename T>
void FuseRgb<T>::collect(std::vector<Parameter<T>*>& out) {
  mix_.collect(out);
  rcab_.collect(out);
}

// --------------------------------------------------------------- NaimaModel

namespace {

ModelConfig validated(ModelConfig cfg) {
  cfg.validate();
  return cfg;
}

std::string encoder_tag(const ModelConfig& cfg, std::uint64_t fingerprint) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fingerprint));
  return cfg.encoder_kind + ":" + buf;
}

std::vector<double> arch_row(const ModelConfig& cfg, int embed_dim) {
  return {static_cast<double>(cfg.levels),
          static_cast<double>(cfg.channels),
          static_cast<double>(cfg.rcab_per_level),
          static_cast<double>(cfg.reduction),
          static_cast<double>(cfg.rgb_blocks_per_level),
          static_cast<double>(cfg.head_rcabs),
          static_cast<double>(cfg.d_k),
          static_cast<double>(cfg.scale),
          cfg.variant == "naima" ? 0.0 : 1.0,
          static_cast<double>(embed_dim),
          cfg.raw_qkv ? 1.0 : 0.0};
}

const char* kArchFieldNames[] = {
    "levels",     "channels", "rcab_per_level", "reduction",
    "rgb_blocks", "head_rcabs", "d_k",          "scale",
    "variant",    "embed_dim", "raw_qkv"};

}  // namespace

template <typename T>
NaimaModel<T>::NaimaModel(const ModelConfig& cfg)
    : cfg_(validated(cfg)),
      provider_(make_token_provider<T>(cfg.encoder_kind, cfg.embed_dim,
                                       cfg.encoder_seed, cfg.encoder_weights)),
      stem_("stem", 1, cfg.channels, 3),
      rgb_("rgb", cfg.channels, cfg.levels, cfg.rgb_blocks_per_level),
      head_("head", cfg.channels, cfg.head_rcabs, cfg.reduction) {
  const int ed = provider_->embed_dim();
  for (int i = 0; i < cfg.levels; ++i) {
    const std::string n = std::to_string(i + 1);
    enc_.emplace_back("enc" + n, cfg.channels, cfg.rcab_per_level, cfg.reduction);
    proj_.emplace_back("proj" + n, ed, cfg.channels * 4, 3);
    align_.emplace_back(2);
    attn_.emplace_back("attn" + n, cfg.channels, cfg.d_k, cfg.alpha_init,
                       cfg.raw_qkv, cfg.max_n);
    fuse_.emplace_back("fuse" + n, cfg.channels, cfg.reduction);
  }
  init_params();
}

template <typename T>
void NaimaModel<T>::init_params() {
  // One generator per top-level module, keyed by name, so shared modules get
  // identical values across variants initialized from the same seed.
  auto seeded = [&](const std::string& nm) {
    return Rng(hash_combine(cfg_.init_seed, fnv1a64(nm.data(), nm.size())));
  };
  Rng r_stem = seeded("stem");
  stem_.init(r_stem, std::sqrt(2.0 / 9.0));
  for (int i = 0; i < cfg_.levels; ++i) {
    const std::string n = std::to_string(i + 1);
    Rng r_enc = seeded("enc" + n);
    enc_[i].init(r_enc);
    Rng r_proj = seeded("proj" + n);
    proj_[i].init(r_proj, std::sqrt(2.0 / (proj_[i].in_ch() * 9)));
    Rng r_attn = seeded("attn" + n);
    attn_[i].init(r_attn);
    Rng r_fuse = seeded("fuse" + n);
    fuse_[i].init(r_fuse);
  }
  Rng r_rgb = seeded("rgb");
  rgb_.init(r_rgb);
  Rng r_head = seeded("head");
  head_.init(r_head);
}

template <typename T>
Tensor<T> NaimaModel<T>::forward(const Tensor<T>& rgb, const Tensor<T>& d_lr,
                                 bool training, ForwardTrace<T>* trace) {
  if (d_lr.channels() != 1)
    throw ShapeError("low-resolution depth must have 1 channel, got " +
                     d_lr.shape_str());
  if (rgb.height() != d_lr.height() * cfg_.scale ||
      rgb.width() != d_lr.width() * cfg_.scale)
    throw ShapeError("rgb " + rgb.shape_str() + " is not " +
                     std::to_string(cfg_.scale) + "x the depth grid " +
                     d_lr.shape_str());
  const Tensor<T> d_up = bicubic_upsample(d_lr, cfg_.scale);
  return forward_hr(rgb, d_up, training, trace);
}

template <typename T>
Tensor<T> NaimaModel<T>::forward_hr(const Tensor<T>& rgb, const Tensor<T>& d_up,
                                    bool training, ForwardTrace<T>* trace) {
  if (rgb.channels() != 3)
    throw ShapeError("rgb must have 3 channels, got " + rgb.shape_str());
  if (d_up.channels() != 1 || d_up.height() != rgb.height() ||
      d_up.width() != rgb.width())
    throw ShapeError("upsampled depth " + d_up.shape_str() +
                     " does not match rgb " + rgb.shape_str());
  const int h = rgb.height(), w = rgb.width();
  if (h % 14 != 0 || w % 14 != 0)
    throw UsageError("working grid " + std::to_string(h) + "x" +
                     std::to_string(w) +
                     " is not divisible by the token patch size 14; pad first");

  const TokenSet<T> tokens = provider_->extract(rgb);

  Tensor<T> cur = stem_.forward(d_up);
  if (trace) {
    trace->d_up = d_up;
    trace->d0 = cur;
    trace->e.clear();
    trace->f.clear();
    trace->dstar.clear();
    trace->d.clear();
  }

  std::vector<Tensor<T>> taps = rgb_.forward(rgb);

  const bool gated = (cfg_.variant == "naima");
  for (int i = 0; i < cfg_.levels; ++i) {
    const Tensor<T>& e = enc_[i].forward(cur);
    const Tensor<T>& s = proj_[i].forward(tokens.levels[i]);
    Tensor<T> f = align_[i].forward(s, h, w);
    Tensor<T> dstar;
    if (gated) {
      try {
        dstar = attn_[i].forward(e, f, training);
      } catch (const NumericError& err) {
        throw NumericError("level " + std::to_string(i + 1) + ": " + err.what());
      }
    } else {
      dstar = e;
      kernels::axpy(T(1), f.data(), dstar.data(), dstar.size());
      dstar.role = Role::injected_depth;
    }
    Tensor<T> d = fuse_[i].forward(dstar, taps[i]);
    if (trace) {
      Tensor<T> ec = e;
      ec.role = Role::depth_encoding;
      trace->e.push_back(std::move(ec));
      trace->f.push_back(f);
      trace->dstar.push_back(std::move(dstar));
      trace->d.push_back(d);
    }
    cur = std::move(d);
  }

  Tensor<T> pred = head_.forward(cur, d_up);
  pred.role = Role::depth_hr;
  if (trace) {
    for (auto& t : taps) t.role = Role::rgb_features;
    trace->rgb_taps = taps;
  }
  have_forward_ = training;
  return pred;
}

template <typename T>
void NaimaModel<T>::backward(const Tensor<T>& dpred) {
  if (!have_forward_)
    throw Error("backward requires a preceding training-mode forward pass");
  const int h = dpred.height(), w = dpred.width();
  const int c = cfg_.channels;

  Tensor<T> dd(c, h, w);
  head_.backward(dpred, dd);

  std::vector<Tensor<T>> dtaps;
  for (int i = 0; i < cfg_.levels; ++i) dtaps.emplace_back(c, h, w);

  const bool gated = (cfg_.variant == "naima");
  for (int i = cfg_.levels - 1; i >= 0; --i) {
    Tensor<T> ddstar(c, h, w);
    fuse_[i].backward(dd, ddstar, dtaps[i]);
    Tensor<T> de(c, h, w);
    Tensor<T> df(c, h, w);
    if (gated) {
      attn_[i].backward(ddstar, de, df);
      attn_[i].release_cache();
    } else {
      kernels::axpy(T(1), ddstar.data(), de.data(), de.size());
      kernels::axpy(T(1), ddstar.data(), df.data(), df.size());
    }
    Tensor<T> ds = align_[i].backward(df);
    proj_[i].backward(ds, nullptr);
    Tensor<T> dprev(c, h, w);
    enc_[i].backward(de, dprev);
    dd = std::move(dprev);
  }

  rgb_.backward(dtaps);
  stem_.backward(dd, nullptr);
  have_forward_ = false;
}

template <typename T>
std::vector<Parameter<T>*> NaimaModel<T>::params() {
  std::vector<Parameter<T>*> out;
  stem_.collect(out);
  const bool gated = (cfg_.variant == "naima");
  for (int i = 0; i < cfg_.levels; ++i) {
    enc_[i].collect(out);
    proj_[i].collect(out);
    if (gated) attn_[i].collect(out);
    fuse_[i].collect(out);
  }
  rgb_.collect(out);
  head_.collect(out);
  return out;
}

template <typename T>
void NaimaModel<T>::zero_grads() {
  for (Parameter<T>* p : params()) p->grad.zero();
}

template <typename T>
void NaimaModel<T>::zero_residual_branches() {
  for (int i = 0; i < cfg_.levels; ++i) {
    enc_[i].zero_residual();
    proj_[i].zero_weights();  // token branch contributes nothing
    attn_[i].alpha().value.zero();
    fuse_[i].zero_residual();
  }
  rgb_.zero_residual();
  head_.zero_residual();
}

template <typename T>
void NaimaModel<T>::save_params(BlobFile& bf) const {
  // params() is non-const only because callers mutate through it
  auto* self = const_cast<NaimaModel<T>*>(this);
  for (Parameter<T>* p : self->params()) bf.put_tensor("param/" + p->name, p->value);
  write_arch(bf);
}

template <typename T>
void NaimaModel<T>::load_params(const BlobFile& bf) {
  check_arch(bf, cfg_);
  if (bf.has("meta/encoder")) {
    const std::string want = encoder_tag(cfg_, provider_->fingerprint());
    const std::string got = bf.get_bytes("meta/encoder");
    if (got != want)
      throw UsageError("checkpoint was trained with semantic encoder " + got +
                       " but the current config selects " + want);
  }
  for (Parameter<T>* p : params()) {
    const std::string key = "param/" + p->name;
    if (!bf.has(key)) throw UsageError("checkpoint is missing tensor " + key);
    Tensor<T> t = bf.get_tensor<T>(key);
    if (!t.same_shape(p->value))
      throw UsageError("checkpoint tensor " + key + " has shape " +
                       t.shape_str() + ", expected " + p->value.shape_str());
    p->value = std::move(t);
  }
}

template <typename T>
void NaimaModel<T>::write_arch(BlobFile& bf) const {
  const std::vector<double> row = arch_row(cfg_, provider_->embed_dim());
  Tensor<double> t(1, 1, static_cast<int>(row.size()));
  for (std::size_t i = 0; i < row.size(); ++i) t.data()[i] = row[i];
  bf.put_tensor("meta/arch", t);
  bf.put_bytes("meta/encoder", encoder_tag(cfg_, provider_->fingerprint()));
}

template <typename T>
void NaimaModel<T>::check_arch(const BlobFile& bf, const ModelConfig& cfg) {
  if (!bf.has("meta/arch"))
    throw UsageError("checkpoint has no architecture record");
  const Tensor<double> t = bf.template get_tensor<double>("meta/arch");
  // embed_dim slot: for stub encoders it equals cfg.embed_dim; pretrained
  // containers fix it themselves, so compare against the stored value only
  // when the kinds match.
  ModelConfig probe = cfg;
  std::vector<double> want = arch_row(probe, probe.encoder_kind == "stub"
                                                 ? probe.embed_dim
                                                 : static_cast<int>(t.data()[9]));
  if (t.size() != want.size())
    throw UsageError("checkpoint architecture record has unexpected length");
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (t.data()[i] != want[i])
      throw UsageError(std::string("checkpoint architecture mismatch: ") +
                       kArchFieldNames[i] + " is " +
                       std::to_string(t.data()[i]) + " in the checkpoint but " +
                       std::to_string(want[i]) + " in the current config");
  }
}

#define NAIMA_INSTANTIATE_GTA(T)        \
  template class TokenAlign<T>;         \
  template class CrossAttention<T>;     \
  template class FuseRgb<T>;            \
  template class NaimaModel<T>;

NAIMA_INSTANTIATE_GTA(float)
NAIMA_INSTANTIATE_GTA(double)

#undef NAIMA_INSTANTIATE_GTA

}  // namespace naima
