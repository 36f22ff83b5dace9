#include "naima/optim.hpp"

#include <cmath>

#include "naima/error.hpp"

namespace naima {

double lr_schedule(int epoch, const TrainConfig& cfg) {
  return cfg.lr0 * std::pow(cfg.decay_factor, epoch / cfg.decay_every);
}

template <typename T>
void Adam<T>::bind(const std::vector<Parameter<T>*>& params) {
  if (m_.empty()) {
    for (const Parameter<T>* p : params) {
      m_.emplace_back(p->value.channels(), p->value.height(), p->value.width());
      v_.emplace_back(p->value.channels(), p->value.height(), p->value.width());
    }
    return;
  }
  if (m_.size() != params.size())
    throw Error("optimizer state holds " + std::to_string(m_.size()) +
                " tensors but the model has " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!m_[i].same_shape(params[i]->value))
      throw Error("optimizer state shape mismatch for " + params[i]->name);
}

template <typename T>
void Adam<T>::step(const std::vector<Parameter<T>*>& params, double lr) {
  bind(params);
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, t_);
  const double c2 = 1.0 - std::pow(b2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    T* m = m_[i].data();
    T* v = v_[i].data();
    const T* g = p.grad.data();
    T* x = p.value.data();
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double gj = static_cast<double>(g[j]);
      const double mj = b1_ * static_cast<double>(m[j]) + (1.0 - b1_) * gj;
      const double vj = b2_ * static_cast<double>(v[j]) + (1.0 - b2_) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      x[j] -= static_cast<T>(lr * (mj / c1) / (std::sqrt(vj / c2) + eps_));
    }
  }
}

template <typename T>
void Adam<T>::save(BlobFile& bf, const std::vector<Parameter<T>*>& params) const {
  if (!m_.empty() && m_.size() != params.size())
    throw Error("optimizer state does not match the parameter list");
  bf.put_scalar("adam/t", static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    bf.put_tensor("adam/m/" + params[i]->name, m_[i]);
    bf.put_tensor("adam/v/" + params[i]->name, v_[i]);
  }
}

template <typename T>
void Adam<T>::load(const BlobFile& bf, const std::vector<Parameter<T>*>& params) {
  t_ = static_cast<int>(bf.get_scalar("adam/t"));
  m_.clear();
  v_.clear();
  if (t_ == 0) return;  // saved before any step: buffers start fresh
  for (const Parameter<T>* p : params) {
    m_.push_back(bf.get_tensor<T>("adam/m/" + p->name));
    v_.push_back(bf.get_tensor<T>("adam/v/" + p->name));
    if (!m_.back().same_shape(p->value) || !v_.back().same_shape(p->value))
      throw Error("optimizer state shape mismatch for " + p->name);
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace naima
