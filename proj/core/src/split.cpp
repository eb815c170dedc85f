#include "hmpnn/split.hpp"

#include <algorithm>
#include <cmath>

#include "hmpnn/errors.hpp"
#include "hmpnn/rng.hpp"

namespace hmpnn {

namespace {

// Member indices per class, each list shuffled with the shared generator.
// Class 0 is processed first so the draw sequence is fixed.
std::vector<std::vector<int>> shuffled_classes(const std::vector<int>& labels, Rng& rng) {
  std::vector<std::vector<int>> cls(2);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw ValidationError("split: labels must be 0 or 1");
    cls[labels[i]].push_back(static_cast<int>(i));
  }
  for (auto& members : cls)
    for (int i = static_cast<int>(members.size()) - 1; i > 0; --i)
      std::swap(members[i], members[rng.pick(i + 1)]);
  return cls;
}

}  // namespace

SplitSpec stratified_split(const std::vector<int>& labels, double ratio, uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ValidationError("stratified_split: ratio must lie in (0, 1)");
  Rng rng(seed);
  const auto cls = shuffled_classes(labels, rng);
  SplitSpec split;
  split.ratio = ratio;
  split.seed = seed;
  for (const auto& members : cls) {
    // Two members minimum keeps the clamp below well formed and both sides
    // of every class nonempty.
    if (members.size() < 2)
      throw ValidationError("stratified_split: each class needs at least two members");
    long n_train = std::lround(ratio * static_cast<double>(members.size()));
    // Keep both sides nonempty per class so prevalence is defined everywhere.
    n_train = std::clamp(n_train, 1L, static_cast<long>(members.size()) - 1);
    for (size_t i = 0; i < members.size(); ++i)
      (static_cast<long>(i) < n_train ? split.train : split.test).push_back(members[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<SplitSpec> kfold_stratified(const std::vector<int>& labels, int k, uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_stratified: k must be at least 2");
  Rng rng(seed);
  const auto cls = shuffled_classes(labels, rng);
  for (const auto& members : cls)
    if (static_cast<int>(members.size()) < k)
      throw ValidationError("kfold_stratified: a class has fewer members than folds");

  std::vector<std::vector<int>> fold_members(k);
  for (const auto& members : cls)
    for (size_t i = 0; i < members.size(); ++i)
      fold_members[i % k].push_back(members[i]);

  std::vector<SplitSpec> folds(k);
  for (int f = 0; f < k; ++f) {
    folds[f].seed = seed;
    folds[f].ratio = 1.0 - 1.0 / k;
    folds[f].test = fold_members[f];
    for (int g = 0; g < k; ++g)
      if (g != f)
        folds[f].train.insert(folds[f].train.end(), fold_members[g].begin(),
                              fold_members[g].end());
    std::sort(folds[f].train.begin(), folds[f].train.end());
    std::sort(folds[f].test.begin(), folds[f].test.end());
  }
  return folds;
}

}  // namespace hmpnn
