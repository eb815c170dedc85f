#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hmpnn/matrix.hpp"
#include "hmpnn/schema.hpp"

namespace hmpnn {

// Node features for one node type, used as build_graph input.
struct NodeTable {
  int node_type = -1;
  DenseMatrix features;  // n x feature_dim
};

// Edges of one meta step, parallel src/dst arrays in insertion order.
struct EdgeTable {
  MetaStep step;
  std::vector<int> src;
  std::vector<int> dst;
  DenseMatrix features;  // m x edge feature_dim
};

// Edges of one meta step inside a built graph, plus the incoming index:
// in_ptr/in_edges list every edge id grouped by target node, preserving
// insertion order within each group.
struct EdgeSet {
  std::vector<int> src;
  std::vector<int> dst;
  DenseMatrix features;
  std::vector<int> in_ptr;    // size n_target + 1
  std::vector<int> in_edges;  // size m, edge ids grouped by dst
  std::vector<int> out_count;  // size n_source

  int size() const { return static_cast<int>(src.size()); }
};

// (source node, edge id) pair returned by incoming-neighborhood queries;
// the edge id is the row into the step's edge feature matrix.
struct NeighborRef {
  int source = -1;
  int edge = -1;
};

enum class Direction { kIn, kOut };

class HeteroGraph {
 public:
  HeteroSchema schema;
  std::vector<DenseMatrix> node_features;   // one per node type
  std::vector<EdgeSet> edge_sets;           // one per schema meta step
  std::vector<std::vector<int>> labels;     // one per node type, empty if unlabeled

  int node_count(int node_type) const {
    return node_features.at(node_type).rows;
  }
  int total_edges() const;
  const EdgeSet& edges(int step_index) const { return edge_sets.at(step_index); }

  // All (source node, edge id) pairs of edges arriving at v along the given
  // meta step, in insertion order.
  std::vector<NeighborRef> incoming(int step_index, int v) const;
  int degree(int step_index, int v, Direction dir) const;

  // Nodes reachable from (node_type, v) within the hop limit, following
  // edges in either direction; edge_type restricts traversal when >= 0.
  // Returns (node_type, node) pairs sorted ascending, including the start.
  std::vector<std::pair<int, int>> egonet(int node_type, int v, int hops,
                                          int edge_type = -1) const;

  // Throws ValidationError naming the offending table when internal
  // invariants are broken (meant for tests and loaders).
  void check() const;
};

// Assembles and validates a graph. Node tables must cover every schema node
// type exactly once; edge tables must reference declared meta steps, at most
// one table per step. Errors name the offending table and row.
HeteroGraph build_graph(const HeteroSchema& schema, std::vector<NodeTable> nodes,
                        std::vector<EdgeTable> edges);

}  // namespace hmpnn
