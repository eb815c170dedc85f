#include "hmpnn/model.hpp"

#include <cmath>
#include <random>

#include "hmpnn/errors.hpp"
#include "hmpnn/netfeatures.hpp"

namespace hmpnn {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogReg: return "logreg";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kHGraphSage: return "hgraphsage";
    case ModelKind::kHmpnnSum: return "hmpnn-sum";
    case ModelKind::kHmpnnCt: return "hmpnn-ct";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "logreg") return ModelKind::kLogReg;
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "hgraphsage") return ModelKind::kHGraphSage;
  if (name == "hmpnn-sum") return ModelKind::kHmpnnSum;
  if (name == "hmpnn-ct") return ModelKind::kHmpnnCt;
  throw ValidationError("unknown model kind '" + name +
                        "' (expected logreg, mlp, hgraphsage, hmpnn-sum or hmpnn-ct)");
}

bool is_graph_model(ModelKind kind) {
  return kind == ModelKind::kHGraphSage || kind == ModelKind::kHmpnnSum ||
         kind == ModelKind::kHmpnnCt;
}

namespace {

void validate_config(const HeteroSchema& schema, const ModelConfig& cfg) {
  if (cfg.layers < 1) throw ValidationError("model config: layers must be >= 1");
  if (cfg.hidden_dim < 1) throw ValidationError("model config: hidden_dim must be >= 1");
  if (cfg.extra_degree_features && cfg.kind != ModelKind::kHGraphSage)
    throw ValidationError("model config: extra_degree_features only applies to hgraphsage");
  if (is_graph_model(cfg.kind)) {
    if (cfg.labeled_type < 0 || cfg.labeled_type >= static_cast<int>(schema.node_types.size()))
      throw ValidationError("model config: labeled_type out of range");
    if (cfg.extra_degree_features && schema.edge_type_index("txn") < 0)
      throw ValidationError("model config: extra_degree_features needs a txn edge type");
  } else {
    if (cfg.entity_input_dim < 1)
      throw ValidationError("model config: entity_input_dim must be >= 1");
  }
}

std::string layer_prefix(int layer) { return "layer" + std::to_string(layer) + "/"; }

}  // namespace

int input_dim(const HeteroSchema& schema, const ModelConfig& cfg, int node_type, int layer) {
  if (layer > 1) return cfg.hidden_dim;
  int d = schema.node_type(node_type).feature_dim();
  if (cfg.kind == ModelKind::kHGraphSage && cfg.extra_degree_features)
    d += counterpart_degree_width(schema, node_type, schema.edge_type_index("txn"));
  return d;
}

std::vector<std::pair<std::string, std::pair<int, int>>> param_shapes(const HeteroSchema& schema,
                                                                      const ModelConfig& cfg) {
  validate_config(schema, cfg);
  std::vector<std::pair<std::string, std::pair<int, int>>> shapes;
  const int h = cfg.hidden_dim;

  if (cfg.kind == ModelKind::kLogReg) {
    shapes.emplace_back("head/W", std::make_pair(1, cfg.entity_input_dim));
    shapes.emplace_back("head/b", std::make_pair(1, 1));
    return shapes;
  }
  if (cfg.kind == ModelKind::kMlp) {
    // K layers means K-1 hidden layers of the input width plus the head.
    const int d = cfg.entity_input_dim;
    for (int k = 1; k < cfg.layers; ++k) {
      shapes.emplace_back(layer_prefix(k) + "dense/W", std::make_pair(d, d));
      shapes.emplace_back(layer_prefix(k) + "dense/b", std::make_pair(1, d));
    }
    shapes.emplace_back("head/W", std::make_pair(1, d));
    shapes.emplace_back("head/b", std::make_pair(1, 1));
    return shapes;
  }

  for (int k = 1; k <= cfg.layers; ++k) {
    for (size_t si = 0; si < schema.meta_steps.size(); ++si) {
      const MetaStep& s = schema.meta_steps[si];
      const std::string base = layer_prefix(k) + schema.step_name(s) + "/";
      const int d_src = input_dim(schema, cfg, s.source_type, k);
      const int d_dst = input_dim(schema, cfg, s.target_type, k);
      const int c = schema.edge_type(s.edge_type).feature_dim();
      if (cfg.kind == ModelKind::kHGraphSage) {
        shapes.emplace_back(base + "W", std::make_pair(h, d_src));
      } else {
        shapes.emplace_back(base + "Wg", std::make_pair(h * d_src, c));
        shapes.emplace_back(base + "bg", std::make_pair(1, h * d_src));
      }
      shapes.emplace_back(base + "B", std::make_pair(h, d_dst));
    }
    if (cfg.kind == ModelKind::kHmpnnCt) {
      for (size_t t = 0; t < schema.node_types.size(); ++t) {
        const int fan = static_cast<int>(schema.steps_into(static_cast<int>(t)).size());
        shapes.emplace_back(layer_prefix(k) + schema.node_types[t].name + "/Wct",
                            std::make_pair(h, h * fan));
      }
    }
  }
  shapes.emplace_back("head/W", std::make_pair(1, h));
  shapes.emplace_back("head/b", std::make_pair(1, 1));
  return shapes;
}

ParamStore init_params(const HeteroSchema& schema, const ModelConfig& cfg, uint64_t seed) {
  ParamStore store;
  std::mt19937_64 rng(seed);
  for (const auto& [name, shape] : param_shapes(schema, cfg)) {
    DenseMatrix& t = store.add(name, shape.first, shape.second);
    const bool is_bias = name.ends_with("/b") || name.ends_with("/bg");
    if (is_bias || t.data.empty()) continue;
    const double bound = std::sqrt(6.0 / (t.rows + t.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.data) v = dist(rng);
  }
  return store;
}

long count_parameters(const HeteroSchema& schema, const ModelConfig& cfg) {
  long n = 0;
  for (const auto& [name, shape] : param_shapes(schema, cfg))
    n += static_cast<long>(shape.first) * shape.second;
  return n;
}

ad::Tensor message_pass_step(ad::Tape& tape, const HeteroGraph& graph, const ModelConfig& cfg,
                             int layer, int step_index, const std::vector<ad::Tensor>& h_prev) {
  const MetaStep& s = graph.schema.meta_steps.at(step_index);
  const EdgeSet& es = graph.edges(step_index);
  const std::string base = layer_prefix(layer) + graph.schema.step_name(s) + "/";
  const int h = cfg.hidden_dim;
  const int n_dst = graph.node_count(s.target_type);

  ad::Tensor src_state = tape.select_rows(h_prev.at(s.source_type), es.src);

  ad::Tensor msgs;
  if (cfg.kind == ModelKind::kHGraphSage) {
    ad::Tensor w = tape.find_param(base + "W");
    msgs = tape.matmul_bt(src_state, w);
  } else {
    // Edge features pass through the affine map g: each edge row becomes a
    // flattened (hidden x d_src) matrix applied to its source state.
    ad::Tensor e = tape.constant(es.features);
    ad::Tensor g = tape.add(tape.matmul_bt(e, tape.find_param(base + "Wg")),
                            tape.find_param(base + "bg"));
    msgs = tape.edge_affine(g, src_state, h);
  }

  ad::Tensor summed = tape.scatter_sum_rows(msgs, es.dst, n_dst);
  ad::Tensor self = tape.matmul_bt(h_prev.at(s.target_type), tape.find_param(base + "B"));
  return tape.sigmoid(tape.add(summed, self));
}

ad::Tensor aggregate(ad::Tape& tape, const HeteroSchema& schema, const ModelConfig& cfg, int layer,
                     int node_type, const std::vector<ad::Tensor>& blocks, int n_nodes) {
  if (blocks.empty()) return tape.sigmoid(tape.zeros(n_nodes, cfg.hidden_dim));
  if (cfg.kind == ModelKind::kHmpnnCt) {
    std::vector<ad::Tensor> squashed;
    squashed.reserve(blocks.size());
    for (ad::Tensor b : blocks) squashed.push_back(tape.sigmoid(b));
    ad::Tensor cat = tape.concat_cols(squashed);
    ad::Tensor wct =
        tape.find_param(layer_prefix(layer) + schema.node_types.at(node_type).name + "/Wct");
    return tape.sigmoid(tape.matmul_bt(cat, wct));
  }
  ad::Tensor acc = blocks[0];
  for (size_t i = 1; i < blocks.size(); ++i) acc = tape.add(acc, blocks[i]);
  return tape.sigmoid(acc);
}

ad::Tensor forward_graph(ad::Tape& tape, const HeteroGraph& graph, const ModelConfig& cfg,
                         const ParamStore& params) {
  validate_config(graph.schema, cfg);
  if (!is_graph_model(cfg.kind))
    throw ValidationError("forward_graph: " + to_string(cfg.kind) + " is not a graph model");
  const HeteroSchema& schema = graph.schema;
  const int n_types = static_cast<int>(schema.node_types.size());

  for (const auto& [name, shape] : param_shapes(schema, cfg)) {
    const DenseMatrix& t = params.get(name);
    if (t.rows != shape.first || t.cols != shape.second)
      throw ValidationError("forward_graph: parameter " + name + " has shape " +
                            std::to_string(t.rows) + "x" + std::to_string(t.cols) +
                            ", expected " + std::to_string(shape.first) + "x" +
                            std::to_string(shape.second));
    tape.param(name, t);
  }

  std::vector<ad::Tensor> h(n_types);
  for (int t = 0; t < n_types; ++t) {
    if (cfg.kind == ModelKind::kHGraphSage && cfg.extra_degree_features) {
      DenseMatrix extra =
          counterpart_degree_columns(graph, t, schema.edge_type_index("txn"));
      const DenseMatrix& base = graph.node_features[t];
      DenseMatrix joined(base.rows, base.cols + extra.cols);
      for (int r = 0; r < base.rows; ++r) {
        for (int c = 0; c < base.cols; ++c) joined.at(r, c) = base.at(r, c);
        for (int c = 0; c < extra.cols; ++c) joined.at(r, base.cols + c) = extra.at(r, c);
      }
      h[t] = tape.constant(std::move(joined));
    } else {
      h[t] = tape.constant(graph.node_features[t]);
    }
  }

  for (int k = 1; k <= cfg.layers; ++k) {
    std::vector<std::vector<ad::Tensor>> blocks(n_types);
    for (size_t si = 0; si < schema.meta_steps.size(); ++si) {
      ad::Tensor hs = message_pass_step(tape, graph, cfg, k, static_cast<int>(si), h);
      blocks[schema.meta_steps[si].target_type].push_back(hs);
    }
    std::vector<ad::Tensor> next(n_types);
    for (int t = 0; t < n_types; ++t)
      next[t] = aggregate(tape, schema, cfg, k, t, blocks[t], graph.node_count(t));
    h = std::move(next);
  }

  ad::Tensor logits = tape.add(tape.matmul_bt(h[cfg.labeled_type], tape.find_param("head/W")),
                               tape.find_param("head/b"));
  return tape.sigmoid(logits);
}

ad::Tensor forward_entity(ad::Tape& tape, const DenseMatrix& features, const ModelConfig& cfg,
                          const ParamStore& params) {
  if (is_graph_model(cfg.kind))
    throw ValidationError("forward_entity: " + to_string(cfg.kind) + " is a graph model");
  if (features.cols != cfg.entity_input_dim)
    throw ValidationError("forward_entity: feature table width " + std::to_string(features.cols) +
                          " does not match entity_input_dim " +
                          std::to_string(cfg.entity_input_dim));

  HeteroSchema dummy;
  for (const auto& [name, shape] : param_shapes(dummy, cfg)) tape.param(name, params.get(name));

  ad::Tensor x = tape.constant(features);
  if (cfg.kind == ModelKind::kMlp) {
    for (int k = 1; k < cfg.layers; ++k) {
      const std::string base = layer_prefix(k) + "dense/";
      x = tape.sigmoid(tape.add(tape.matmul_bt(x, tape.find_param(base + "W")),
                                tape.find_param(base + "b")));
    }
  }
  ad::Tensor logits =
      tape.add(tape.matmul_bt(x, tape.find_param("head/W")), tape.find_param("head/b"));
  return tape.sigmoid(logits);
}

ad::Tensor forward(ad::Tape& tape, const Dataset& data, const ModelConfig& cfg,
                   const ParamStore& params) {
  if (is_graph_model(cfg.kind)) {
    if (!data.graph) throw ValidationError("forward: graph model without a graph");
    return forward_graph(tape, *data.graph, cfg, params);
  }
  if (!data.features) throw ValidationError("forward: entity model without a feature table");
  return forward_entity(tape, *data.features, cfg, params);
}

}  // namespace hmpnn
