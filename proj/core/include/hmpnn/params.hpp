#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "hmpnn/matrix.hpp"

namespace hmpnn {

// Named parameter tensors in a stable insertion order. The order drives
// seeded initialization and optimizer state pairing; lookups are by name.
class ParamStore {
 public:
  DenseMatrix& add(const std::string& name, int rows, int cols) {
    if (index_.count(name)) throw ValidationError("ParamStore: duplicate name '" + name + "'");
    index_[name] = static_cast<int>(names_.size());
    names_.push_back(name);
    tensors_.emplace_back(rows, cols);
    return tensors_.back();
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  DenseMatrix& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("ParamStore: unknown name '" + name + "'");
    return tensors_[it->second];
  }
  const DenseMatrix& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("ParamStore: unknown name '" + name + "'");
    return tensors_[it->second];
  }

  size_t size() const { return names_.size(); }
  const std::string& name(size_t i) const { return names_[i]; }
  DenseMatrix& tensor(size_t i) { return tensors_[i]; }
  const DenseMatrix& tensor(size_t i) const { return tensors_[i]; }

  long total_entries() const {
    long n = 0;
    for (const auto& t : tensors_) n += static_cast<long>(t.rows) * t.cols;
    return n;
  }

 private:
  std::vector<std::string> names_;
  std::vector<DenseMatrix> tensors_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace hmpnn
