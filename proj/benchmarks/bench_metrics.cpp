// Rank-metric cost at evaluation sizes: every training evaluation step pays
// one pr_auc call on the validation slice.
#include <benchmark/benchmark.h>

#include <vector>

#include "hmpnn/metrics.hpp"
#include "hmpnn/rng.hpp"

namespace {

using namespace hmpnn;

void make_instance(int n, std::vector<double>& s, std::vector<int>& y) {
  Rng rng(5);
  s.resize(n);
  y.resize(n);
  for (int i = 0; i < n; ++i) {
    s[i] = rng.uniform();
    y[i] = rng.uniform() < 0.02 ? 1 : 0;
  }
  y[0] = 1;
  y[1] = 0;
}

void bm_roc_auc(benchmark::State& state) {
  std::vector<double> s;
  std::vector<int> y;
  make_instance(static_cast<int>(state.range(0)), s, y);
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s, y));
}

void bm_pr_auc(benchmark::State& state) {
  std::vector<double> s;
  std::vector<int> y;
  make_instance(static_cast<int>(state.range(0)), s, y);
  for (auto _ : state) benchmark::DoNotOptimize(pr_auc(s, y));
}

BENCHMARK(bm_roc_auc)->Arg(1000)->Arg(20000);
BENCHMARK(bm_pr_auc)->Arg(1000)->Arg(20000);

}  // namespace
