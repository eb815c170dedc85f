#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpnn/graph.hpp"
#include "hmpnn/matrix.hpp"

namespace hmpnn {

// ---------------------------------------------------------------------------
// Summary features (transaction network schema).
//
// Unweighted block, 11 columns per individual:
//   0-2  txn out-degree to individual / organization / external
//   3-5  txn in-degree from individual / organization / external
//   6    role out-degree
//   7    total in-degree
//   8    total out-degree (txn + role)
//   9    total degree
//   10   number of the seven directional columns that are nonzero
//
// Weighted block, 8 columns per individual:
//   0-2  txn amount sums outgoing to individual / organization / external
//   3-5  txn amount sums incoming from individual / organization / external
//   6    total incoming amount
//   7    total outgoing amount
// ---------------------------------------------------------------------------

DenseMatrix unweighted_summary(const HeteroGraph& g);
std::vector<std::string> unweighted_summary_names();

DenseMatrix weighted_summary(const HeteroGraph& g);
std::vector<std::string> weighted_summary_names();

// In/out degree counts of one edge type split by counterpart node type, one
// column per declared meta step touching the node type (out columns first).
// For the transaction schema this yields 6 columns for individuals and
// organizations and 4 for externals.
int counterpart_degree_width(const HeteroSchema& schema, int node_type, int edge_type);
DenseMatrix counterpart_degree_columns(const HeteroGraph& g, int node_type, int edge_type);

// ---------------------------------------------------------------------------
// Meta-path random walks and skip-gram embeddings.
// ---------------------------------------------------------------------------

// Alternating node and edge types; node_types has one more entry than
// edge_types. Walks cycle the pattern when the last node type equals the
// first. Edges are traversed ignoring direction: a pattern step from type a
// to type b over edge type e may use a declared step (a,e,b) forwards or
// (b,e,a) backwards.
struct MetaPath {
  std::vector<int> node_types;
  std::vector<int> edge_types;

  void validate(const HeteroSchema& schema) const;
  std::string name(const HeteroSchema& schema) const;  // "individual-txn-..."
};

// The four individual-anchored paths used by the default feature table:
// ind-txn-ind-txn-ind, ind-txn-org-txn-ind, ind-txn-ext-txn-ind,
// ind-role-org-txn-ind.
std::vector<MetaPath> default_meta_paths(const HeteroSchema& schema);

struct WalkConfig {
  int walk_length = 20;    // steps, so at most walk_length + 1 nodes
  int walks_per_node = 10;
  uint64_t seed = 0;
};

// Walks from every node of the path's start type. Node types per position
// follow the cycled pattern, so only node ids are stored. A walk ends early
// when no edge matches the next pattern step.
struct WalkCorpus {
  MetaPath path;
  std::vector<std::vector<int>> walks;
};

WalkCorpus generate_walks(const HeteroGraph& g, const MetaPath& path, const WalkConfig& cfg);

struct SkipGramConfig {
  int dim = 8;
  int context_radius = 10;
  int negatives = 1;
  int epochs = 5;
  double lr = 0.025;
  double lr_min = 1e-4;  // linear decay floor
  uint64_t seed = 0;
};

// Center and context tables over every node whose type appears in the path,
// rows grouped by node type in type index order. Rows of nodes that never
// occur in a walk of length >= 2 are zeroed after training and reported as
// unvisited.
class EmbeddingTable {
 public:
  EmbeddingTable(const HeteroGraph& g, const MetaPath& path, int dim);

  bool in_vocab(int node_type) const { return offset_.at(node_type) >= 0; }
  int row_of(int node_type, int node) const;
  const DenseMatrix& center() const { return center_; }
  const DenseMatrix& context() const { return context_; }
  DenseMatrix& center() { return center_; }
  DenseMatrix& context() { return context_; }
  bool visited(int node_type, int node) const { return visited_[row_of(node_type, node)]; }
  void mark_visited(int node_type, int node) { visited_[row_of(node_type, node)] = 1; }
  int visited_count(int node_type) const;
  int type_size(int node_type) const;

  void zero_unvisited();

 private:
  std::vector<int> offset_;  // per node type, -1 when absent
  std::vector<int> size_;
  std::vector<char> visited_;
  DenseMatrix center_;
  DenseMatrix context_;
};

EmbeddingTable train_skipgram(const HeteroGraph& g, const WalkCorpus& corpus,
                              const SkipGramConfig& cfg);

// Negative sampling objective of one window pair under the given tables;
// exposed so tests can check that updates decrease it.
double skipgram_pair_loss(const EmbeddingTable& table, int center_row, int context_row,
                          const std::vector<int>& negative_rows);

// ---------------------------------------------------------------------------
// Assembled per-individual feature table.
// ---------------------------------------------------------------------------

struct FeatureConfig {
  bool intrinsic = true;
  bool unweighted = true;
  bool weighted = true;
  bool embeddings = true;
  WalkConfig walk;
  SkipGramConfig skipgram;
  // Defaults to default_meta_paths() when empty.
  std::vector<MetaPath> paths;
};

struct FeatureTable {
  DenseMatrix values;  // one row per individual
  std::vector<std::string> names;
};

struct CoverageEntry {
  std::string path;
  int visited = 0;
  int total = 0;
};

// With everything enabled: 11 intrinsic + 11 unweighted + 8 weighted +
// (2 * dim) columns per meta path (walk-start block, then walk-end block;
// both read the trained center table). Coverage, when requested, reports
// visited individuals per path.
FeatureTable assemble_features(const HeteroGraph& g, const FeatureConfig& cfg,
                               std::vector<CoverageEntry>* coverage = nullptr);

void save_feature_table(const std::string& path, const FeatureTable& table);
FeatureTable load_feature_table(const std::string& path);

}  // namespace hmpnn
