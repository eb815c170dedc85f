#pragma once

#include <cstdint>
#include <vector>

namespace hmpnn {

// Index split over one labeled node set. Indices are sorted ascending and
// the two sides partition [0, labels.size()).
struct SplitSpec {
  std::vector<int> train;
  std::vector<int> test;
  double ratio = 0.7;
  uint64_t seed = 0;
};

// Shuffles each class with the seeded generator, then allocates
// round(ratio * class size) per class to the train side. Both classes must
// be nonempty.
SplitSpec stratified_split(const std::vector<int>& labels, double ratio, uint64_t seed);

// k folds with per-class counts differing by at most one: each class is
// shuffled, then dealt round robin. Fold i is the test side of result[i].
// Every class needs at least k members.
std::vector<SplitSpec> kfold_stratified(const std::vector<int>& labels, int k, uint64_t seed);

}  // namespace hmpnn
