// Walk generation and feature assembly cost, the fixed per-seed overhead of
// the experiment pipeline.
#include <benchmark/benchmark.h>

#include "hmpnn/netfeatures.hpp"
#include "hmpnn/synthgen.hpp"

namespace {

using namespace hmpnn;

const HeteroGraph& walk_graph() {
  static const HeteroGraph g = [] {
    GenConfig cfg;
    cfg.n_individual = 2000;
    cfg.n_organization = 200;
    cfg.n_external = 120;
    cfg.prevalence = 0.01;
    return generate(cfg, 7);
  }();
  return g;
}

void bm_generate_walks(benchmark::State& state) {
  const HeteroGraph& g = walk_graph();
  const MetaPath path = default_meta_paths(g.schema)[1];  // ind-txn-org-txn-ind
  WalkConfig cfg;
  for (auto _ : state) {
    WalkCorpus c = generate_walks(g, path, cfg);
    benchmark::DoNotOptimize(c.walks.size());
  }
}

void bm_assemble_features(benchmark::State& state) {
  const HeteroGraph& g = walk_graph();
  FeatureConfig cfg;
  cfg.walk.walks_per_node = 3;
  cfg.walk.walk_length = 12;
  cfg.skipgram.epochs = 1;
  for (auto _ : state) {
    FeatureTable t = assemble_features(g, cfg);
    benchmark::DoNotOptimize(t.values.data.data());
  }
}

BENCHMARK(bm_generate_walks)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_assemble_features)->Unit(benchmark::kMillisecond);

}  // namespace
