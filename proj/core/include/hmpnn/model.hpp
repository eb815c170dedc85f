#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpnn/graph.hpp"
#include "hmpnn/params.hpp"
#include "hmpnn/tensor.hpp"

namespace hmpnn {

// The five model kinds trained by the lab. The two entity kinds only see the
// assembled per-node feature table; the three graph kinds run message
// passing over the heterogeneous graph.
enum class ModelKind { kLogReg, kMlp, kHGraphSage, kHmpnnSum, kHmpnnCt };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
bool is_graph_model(ModelKind kind);

struct ModelConfig {
  ModelKind kind = ModelKind::kHmpnnCt;
  int layers = 1;      // K; logreg ignores it, mlp uses K-1 hidden layers
  int hidden_dim = 8;  // width of hidden node states in graph models
  // hgraphsage only: append txn in/out degree counts per counterpart node
  // type to the layer-1 node features.
  bool extra_degree_features = false;
  int entity_input_dim = 94;  // feature table width for logreg / mlp
  int labeled_type = 0;       // node type carrying labels and the score head
};

// Width of the layer-k input state for a node type: the (possibly extended)
// raw feature width at layer 1, hidden_dim afterwards. layer is 1-based.
int input_dim(const HeteroSchema& schema, const ModelConfig& cfg, int node_type, int layer);

// Tensor names and shapes in initialization order:
//   hmpnn kinds:   layer<k>/<src>__<etype>__<dst>/{Wg,bg,B}
//   hmpnn-ct adds: layer<k>/<node type>/Wct
//   hgraphsage:    layer<k>/<src>__<etype>__<dst>/{W,B}
//   mlp:           layer<k>/dense/{W,b}
//   all:           head/{W,b}
// Weight matrices are stored (output rows x input cols); bg is a row vector.
std::vector<std::pair<std::string, std::pair<int, int>>> param_shapes(const HeteroSchema& schema,
                                                                      const ModelConfig& cfg);

// Seeded uniform init on +-sqrt(6 / (rows + cols)) per weight tensor, zeros
// for bg/b biases.
ParamStore init_params(const HeteroSchema& schema, const ModelConfig& cfg, uint64_t seed);

long count_parameters(const HeteroSchema& schema, const ModelConfig& cfg);

// One meta step at layer k (1-based): gathers source states, applies the
// edge-conditioned affine message map (or the fixed matrix for hgraphsage),
// sums messages per target and adds the transformed previous self state.
// h_prev holds the layer-(k-1) state per node type; the step's parameters
// must already be registered on the tape. Returns the per-target block
// sigma(message_sum + B * h_prev[target]).
ad::Tensor message_pass_step(ad::Tape& tape, const HeteroGraph& graph, const ModelConfig& cfg,
                             int layer, int step_index, const std::vector<ad::Tensor>& h_prev);

// Combines the per-step blocks of one node type at layer k. Sum kinds return
// sigma(sum of blocks); hmpnn-ct returns sigma(Wct * concat(sigma(block))),
// with Wct looked up on the tape by name. With no incoming meta steps, both
// give sigma(0) = 0.5 states.
ad::Tensor aggregate(ad::Tape& tape, const HeteroSchema& schema, const ModelConfig& cfg, int layer,
                     int node_type, const std::vector<ad::Tensor>& blocks, int n_nodes);

// Scores (n x 1, sigmoid outputs) for every node of cfg.labeled_type.
ad::Tensor forward_graph(ad::Tape& tape, const HeteroGraph& graph, const ModelConfig& cfg,
                         const ParamStore& params);

// Scores for every row of the feature table.
ad::Tensor forward_entity(ad::Tape& tape, const DenseMatrix& features, const ModelConfig& cfg,
                          const ParamStore& params);

// What a model consumes: graph kinds read .graph, entity kinds read
// .features; the unused half may be null.
struct Dataset {
  const HeteroGraph* graph = nullptr;
  const DenseMatrix* features = nullptr;
};

ad::Tensor forward(ad::Tape& tape, const Dataset& data, const ModelConfig& cfg,
                   const ParamStore& params);

}  // namespace hmpnn
