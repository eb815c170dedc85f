#include "hmpnn/optim.hpp"

#include <cmath>

#include "hmpnn/errors.hpp"

namespace hmpnn {

Adam::Adam(const ParamStore& params, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.tensor(i).rows, params.tensor(i).cols);
    v_.emplace_back(params.tensor(i).rows, params.tensor(i).cols);
  }
}

void Adam::step(ParamStore& params, const std::vector<const DenseMatrix*>& grads) {
  if (grads.size() != params.size())
    throw ValidationError("Adam::step: gradient count does not match parameter count");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    DenseMatrix& theta = params.tensor(i);
    const DenseMatrix& g = *grads[i];
    if (!theta.same_shape(g))
      throw ValidationError("Adam::step: gradient shape mismatch for " + params.name(i));
    DenseMatrix& m = m_[i];
    DenseMatrix& v = v_[i];
    for (size_t j = 0; j < theta.data.size(); ++j) {
      const double grad = g.data[j] + cfg_.l2 * theta.data[j];
      m.data[j] = cfg_.beta1 * m.data[j] + (1.0 - cfg_.beta1) * grad;
      v.data[j] = cfg_.beta2 * v.data[j] + (1.0 - cfg_.beta2) * grad * grad;
      const double mhat = m.data[j] / bc1;
      const double vhat = v.data[j] / bc2;
      theta.data[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::step(ParamStore& params, const ad::Tape& tape) {
  std::vector<const DenseMatrix*> grads;
  grads.reserve(params.size());
  for (size_t i = 0; i < params.size(); ++i) grads.push_back(&tape.grad_of(params.name(i)));
  step(params, grads);
}

}  // namespace hmpnn
