#pragma once

#include <vector>

#include "naima/blocks.hpp"
#include "naima/config.hpp"
#include "naima/serialize.hpp"

namespace naima {

// Step-decay schedule: lr0 * decay_factor^(epoch / decay_every), integer
// division, so the rate is constant within each window.
double lr_schedule(int epoch, const TrainConfig& cfg);

// Adam with bias correction. Moment buffers bind to the parameter list on the
// first step; later calls must pass the same parameters in the same order.
template <typename T>
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(const std::vector<Parameter<T>*>& params, double lr);
  int steps() const { return t_; }

  void save(BlobFile& bf, const std::vector<Parameter<T>*>& params) const;
  void load(const BlobFile& bf, const std::vector<Parameter<T>*>& params);

 private:
  void bind(const std::vector<Parameter<T>*>& params);

  double b1_, b2_, eps_;
  int t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace naima
