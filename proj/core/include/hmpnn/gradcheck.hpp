#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hmpnn/params.hpp"
#include "hmpnn/tensor.hpp"

namespace hmpnn {

// Builds the scalar loss for the current parameter values on the given tape.
// Called once for the analytic pass and twice per parameter entry for the
// central differences, always on a fresh tape.
using LossBuilder = std::function<ad::Tensor(ad::Tape&, const ParamStore&)>;

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int worst_index = -1;  // flat index of the worst entry within the tensor
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_tensor;
  double max_rel_err = 0.0;
  std::string worst_tensor;
};

// Central-difference check of reverse-mode gradients: every parameter entry
// is perturbed by +-h. Relative error uses max(|analytic|, |numeric|, 1e-5)
// as denominator, which keeps finite-difference noise on near-zero entries
// from drowning the signal while still flagging genuinely wrong gradients.
GradCheckReport finite_diff_check(const ParamStore& params, const LossBuilder& build,
                                  double h = 1e-6);

}  // namespace hmpnn
