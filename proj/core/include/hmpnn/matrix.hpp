#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hmpnn/errors.hpp"

namespace hmpnn {

// Row-major dense matrix of doubles. Plain storage shared by the graph
// feature tables, the autodiff values and the parameter store.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
  DenseMatrix(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != static_cast<size_t>(r) * c)
      throw ValidationError("DenseMatrix: data size does not match " + std::to_string(r) + "x" +
                            std::to_string(c));
  }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return data.size(); }

  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

}  // namespace hmpnn
