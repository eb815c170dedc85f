#pragma once

#include <vector>

#include "hmpnn/params.hpp"
#include "hmpnn/tensor.hpp"

namespace hmpnn {

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double l2 = 0.0;  // added to the gradient as l2 * theta before the moment update
};

// Adam with bias correction. Moment buffers pair with the store by position,
// so the same ParamStore instance must be passed to every step.
class Adam {
 public:
  Adam(const ParamStore& params, AdamConfig cfg);

  // grads[i] pairs with params.tensor(i).
  void step(ParamStore& params, const std::vector<const DenseMatrix*>& grads);
  // Convenience: pulls gradients from a tape by parameter name.
  void step(ParamStore& params, const ad::Tape& tape);

  int steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  int t_ = 0;
  std::vector<DenseMatrix> m_;
  std::vector<DenseMatrix> v_;
};

}  // namespace hmpnn
