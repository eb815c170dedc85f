// Forward and backward cost per model kind on a mid-size synthetic graph.
// The per-iteration training cost is forward + backward, so these two
// benchmarks bracket what a tuning run pays per step.
#include <benchmark/benchmark.h>

#include "hmpnn/model.hpp"
#include "hmpnn/rng.hpp"
#include "hmpnn/synthgen.hpp"

namespace {

using namespace hmpnn;

const HeteroGraph& bench_graph() {
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

const DenseMatrix& bench_features() {
  static const DenseMatrix m = [] {
    DenseMatrix f(bench_graph().node_count(aml::kIndividual), 94);
    Rng rng(11);
    for (double& v : f.data) v = rng.normal();
    return f;
  }();
  return m;
}

ModelConfig config_for(const std::string& kind, int layers) {
  ModelConfig mc;
  mc.kind = model_kind_from_string(kind);
  mc.layers = layers;
  return mc;
}

void run_forward(benchmark::State& state, const std::string& kind, int layers, bool backward) {
  const HeteroGraph& g = bench_graph();
  const ModelConfig mc = config_for(kind, layers);
  Dataset data;
  data.graph = &g;
  if (!is_graph_model(mc.kind)) data.features = &bench_features();
  const ParamStore params = init_params(g.schema, mc, 3);
  std::vector<double> y(g.node_count(aml::kIndividual), 0.0);
  for (int v : g.labels[aml::kIndividual]) y[v] = 1.0;  // reuse as dense targets

  for (auto _ : state) {
    ad::Tape tape;
    ad::Tensor scores = forward(tape, data, mc, params);
    if (backward) tape.backward(tape.bce_loss(scores, y));
    benchmark::DoNotOptimize(tape.value(scores).data.data());
  }
}

void fwd_logreg(benchmark::State& s) { run_forward(s, "logreg", 1, false); }
void fwd_mlp3(benchmark::State& s) { run_forward(s, "mlp", 3, false); }
void fwd_sage3(benchmark::State& s) { run_forward(s, "hgraphsage", 3, false); }
void fwd_sum3(benchmark::State& s) { run_forward(s, "hmpnn-sum", 3, false); }
void fwd_ct1(benchmark::State& s) { run_forward(s, "hmpnn-ct", 1, false); }
void fwd_ct3(benchmark::State& s) { run_forward(s, "hmpnn-ct", 3, false); }
void step_ct3(benchmark::State& s) { run_forward(s, "hmpnn-ct", 3, true); }
void step_sage3(benchmark::State& s) { run_forward(s, "hgraphsage", 3, true); }
void step_mlp3(benchmark::State& s) { run_forward(s, "mlp", 3, true); }

BENCHMARK(fwd_logreg)->Unit(benchmark::kMillisecond);
BENCHMARK(fwd_mlp3)->Unit(benchmark::kMillisecond);
BENCHMARK(fwd_sage3)->Unit(benchmark::kMillisecond);
BENCHMARK(fwd_sum3)->Unit(benchmark::kMillisecond);
BENCHMARK(fwd_ct1)->Unit(benchmark::kMillisecond);
BENCHMARK(fwd_ct3)->Unit(benchmark::kMillisecond);
BENCHMARK(step_ct3)->Unit(benchmark::kMillisecond);
BENCHMARK(step_sage3)->Unit(benchmark::kMillisecond);
BENCHMARK(step_mlp3)->Unit(benchmark::kMillisecond);

}  // namespace
