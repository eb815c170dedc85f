#include "hmpnn/gradcheck.hpp"

#include <cmath>

#include "hmpnn/errors.hpp"

namespace hmpnn {

GradCheckReport finite_diff_check(const ParamStore& params, const LossBuilder& build, double h) {
  if (h <= 0.0) throw ValidationError("finite_diff_check: h must be positive");

  // Analytic gradients once.
  std::vector<DenseMatrix> analytic;
  {
    ad::Tape tape;
    ad::Tensor loss = build(tape, params);
    tape.backward(loss);
    analytic.reserve(params.size());
    for (size_t i = 0; i < params.size(); ++i)
      analytic.push_back(tape.grad_of(params.name(i)));
  }

  ParamStore work = params;
  auto eval = [&]() {
    ad::Tape tape;
    return tape.scalar(build(tape, work));
  };

  GradCheckReport report;
  for (size_t i = 0; i < params.size(); ++i) {
    GradCheckEntry entry;
    entry.name = params.name(i);
    DenseMatrix& theta = work.tensor(i);
    for (size_t j = 0; j < theta.data.size(); ++j) {
      const double keep = theta.data[j];
      theta.data[j] = keep + h;
      const double up = eval();
      theta.data[j] = keep - h;
      const double down = eval();
      theta.data[j] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i].data[j];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-5});
      const double rel_err = abs_err / denom;
      if (rel_err > entry.max_rel_err) {
        entry.max_rel_err = rel_err;
        entry.worst_index = static_cast<int>(j);
      }
      entry.max_abs_err = std::max(entry.max_abs_err, abs_err);
    }
    if (entry.max_rel_err > report.max_rel_err) {
      report.max_rel_err = entry.max_rel_err;
      report.worst_tensor = entry.name;
    }
    report.per_tensor.push_back(std::move(entry));
  }
  return report;
}

}  // namespace hmpnn
