#include "hmpnn/graph.hpp"

#include <algorithm>

namespace hmpnn {

int HeteroGraph::total_edges() const {
  int m = 0;
  for (const auto& es : edge_sets) m += es.size();
  return m;
}

std::vector<NeighborRef> HeteroGraph::incoming(int step_index, int v) const {
  const EdgeSet& es = edge_sets.at(step_index);
  const int n = node_count(schema.meta_steps.at(step_index).target_type);
  if (v < 0 || v >= n)
    throw ValidationError("incoming: node " + std::to_string(v) + " out of range for step " +
                          schema.step_name(step_index));
  std::vector<NeighborRef> out;
  out.reserve(es.in_ptr[v + 1] - es.in_ptr[v]);
  for (int p = es.in_ptr[v]; p < es.in_ptr[v + 1]; ++p) {
    const int e = es.in_edges[p];
    out.push_back({es.src[e], e});
  }
  return out;
}

int HeteroGraph::degree(int step_index, int v, Direction dir) const {
  const EdgeSet& es = edge_sets.at(step_index);
  const MetaStep& s = schema.meta_steps.at(step_index);
  if (dir == Direction::kIn) {
    if (v < 0 || v >= node_count(s.target_type))
      throw ValidationError("degree: node " + std::to_string(v) + " out of range for step " +
                            schema.step_name(step_index));
    return es.in_ptr[v + 1] - es.in_ptr[v];
  }
  if (v < 0 || v >= node_count(s.source_type))
    throw ValidationError("degree: node " + std::to_string(v) + " out of range for step " +
                          schema.step_name(step_index));
  return es.out_count[v];
}

std::vector<std::pair<int, int>> HeteroGraph::egonet(int node_type, int v, int hops,
                                                     int edge_type) const {
  if (node_type < 0 || node_type >= static_cast<int>(schema.node_types.size()))
    throw ValidationError("egonet: node type index out of range");
  if (v < 0 || v >= node_count(node_type))
    throw ValidationError("egonet: node " + std::to_string(v) + " out of range");

  std::vector<std::vector<char>> visited(schema.node_types.size());
  for (size_t t = 0; t < visited.size(); ++t)
    visited[t].assign(node_count(static_cast<int>(t)), 0);
  visited[node_type][v] = 1;

  std::vector<std::pair<int, int>> frontier{{node_type, v}};
  std::vector<std::pair<int, int>> result{{node_type, v}};

  for (int h = 0; h < hops && !frontier.empty(); ++h) {
    // Mark the frontier per type, then scan every edge set once in each
    // direction. Linear in edges per hop, which is plenty for a diagnostic.
    std::vector<std::vector<char>> in_frontier(schema.node_types.size());
    for (size_t t = 0; t < in_frontier.size(); ++t)
      in_frontier[t].assign(node_count(static_cast<int>(t)), 0);
    for (auto [t, u] : frontier) in_frontier[t][u] = 1;

    std::vector<std::pair<int, int>> next;
    for (size_t si = 0; si < schema.meta_steps.size(); ++si) {
      const MetaStep& s = schema.meta_steps[si];
      if (edge_type >= 0 && s.edge_type != edge_type) continue;
      const EdgeSet& es = edge_sets[si];
      for (int e = 0; e < es.size(); ++e) {
        if (in_frontier[s.source_type][es.src[e]] && !visited[s.target_type][es.dst[e]]) {
          visited[s.target_type][es.dst[e]] = 1;
          next.emplace_back(s.target_type, es.dst[e]);
        }
        if (in_frontier[s.target_type][es.dst[e]] && !visited[s.source_type][es.src[e]]) {
          visited[s.source_type][es.src[e]] = 1;
          next.emplace_back(s.source_type, es.src[e]);
        }
      }
    }
    for (auto& p : next) result.push_back(p);
    frontier = std::move(next);
  }
  std::sort(result.begin(), result.end());
  return result;
}

void HeteroGraph::check() const {
  schema.validate();
  if (node_features.size() != schema.node_types.size())
    throw ValidationError("graph: node feature table count does not match schema");
  if (edge_sets.size() != schema.meta_steps.size())
    throw ValidationError("graph: edge set count does not match schema");
  for (size_t t = 0; t < node_features.size(); ++t)
    if (node_features[t].cols != schema.node_types[t].feature_dim())
      throw ValidationError("graph: node table " + schema.node_types[t].name +
                            " has feature width " + std::to_string(node_features[t].cols) +
                            ", schema says " +
                            std::to_string(schema.node_types[t].feature_dim()));
  for (size_t si = 0; si < edge_sets.size(); ++si) {
    const MetaStep& s = schema.meta_steps[si];
    const EdgeSet& es = edge_sets[si];
    const std::string name = schema.step_name(s);
    const int m = es.size();
    if (static_cast<int>(es.dst.size()) != m || es.features.rows != m)
      throw ValidationError("graph: edge set " + name + " has inconsistent lengths");
    if (es.features.cols != schema.edge_type(s.edge_type).feature_dim())
      throw ValidationError("graph: edge set " + name + " has feature width " +
                            std::to_string(es.features.cols) + ", schema says " +
                            std::to_string(schema.edge_type(s.edge_type).feature_dim()));
    const int n_dst = node_count(s.target_type);
    if (static_cast<int>(es.in_ptr.size()) != n_dst + 1 ||
        static_cast<int>(es.in_edges.size()) != m || es.in_ptr[n_dst] != m)
      throw ValidationError("graph: edge set " + name + " has a broken incoming index");
  }
  for (size_t t = 0; t < labels.size(); ++t)
    if (!labels[t].empty() && static_cast<int>(labels[t].size()) != node_count(static_cast<int>(t)))
      throw ValidationError("graph: label table " + schema.node_types[t].name +
                            " does not cover every node");
}

HeteroGraph build_graph(const HeteroSchema& schema, std::vector<NodeTable> nodes,
                        std::vector<EdgeTable> edges) {
  schema.validate();

  HeteroGraph g;
  g.schema = schema;
  g.node_features.resize(schema.node_types.size());
  g.labels.resize(schema.node_types.size());

  std::vector<char> seen_type(schema.node_types.size(), 0);
  for (auto& nt : nodes) {
    if (nt.node_type < 0 || nt.node_type >= static_cast<int>(schema.node_types.size()))
      throw ValidationError("build_graph: node table with type index out of range");
    const std::string& name = schema.node_types[nt.node_type].name;
    if (seen_type[nt.node_type])
      throw ValidationError("build_graph: duplicate node table for type " + name);
    seen_type[nt.node_type] = 1;
    if (nt.features.cols != schema.node_types[nt.node_type].feature_dim())
      throw ValidationError("build_graph: node table " + name + " has feature width " +
                            std::to_string(nt.features.cols) + ", schema says " +
                            std::to_string(schema.node_types[nt.node_type].feature_dim()));
    g.node_features[nt.node_type] = std::move(nt.features);
  }
  for (size_t t = 0; t < seen_type.size(); ++t)
    if (!seen_type[t])
      throw ValidationError("build_graph: missing node table for type " +
                            schema.node_types[t].name);

  g.edge_sets.resize(schema.meta_steps.size());
  std::vector<char> seen_step(schema.meta_steps.size(), 0);
  for (auto& et : edges) {
    const int si = schema.step_index(et.step);
    if (si < 0) {
      std::string desc = "(" + std::to_string(et.step.source_type) + "," +
                         std::to_string(et.step.edge_type) + "," +
                         std::to_string(et.step.target_type) + ")";
      if (et.step.source_type >= 0 &&
          et.step.source_type < static_cast<int>(schema.node_types.size()) &&
          et.step.edge_type >= 0 && et.step.edge_type < static_cast<int>(schema.edge_types.size()) &&
          et.step.target_type >= 0 &&
          et.step.target_type < static_cast<int>(schema.node_types.size()))
        desc = schema.step_name(et.step);
      throw ValidationError("build_graph: edge table " + desc +
                            " does not match any declared meta step");
    }
    const std::string name = schema.step_name(si);
    if (seen_step[si]) throw ValidationError("build_graph: duplicate edge table for " + name);
    seen_step[si] = 1;

    const int m = static_cast<int>(et.src.size());
    if (static_cast<int>(et.dst.size()) != m)
      throw ValidationError("build_graph: edge table " + name + " has src/dst length mismatch");
    if (et.features.rows != m)
      throw ValidationError("build_graph: edge table " + name + " has " + std::to_string(m) +
                            " edges but " + std::to_string(et.features.rows) + " feature rows");
    if (et.features.cols != schema.edge_type(et.step.edge_type).feature_dim())
      throw ValidationError("build_graph: edge table " + name + " has feature width " +
                            std::to_string(et.features.cols) + ", schema says " +
                            std::to_string(schema.edge_type(et.step.edge_type).feature_dim()));

    const int n_src = g.node_count(et.step.source_type);
    const int n_dst = g.node_count(et.step.target_type);
    for (int e = 0; e < m; ++e) {
      if (et.src[e] < 0 || et.src[e] >= n_src)
        throw ValidationError("build_graph: edge table " + name + " row " + std::to_string(e) +
                              ": source id " + std::to_string(et.src[e]) + " out of range (" +
                              schema.node_types[et.step.source_type].name + " has " +
                              std::to_string(n_src) + " nodes)");
      if (et.dst[e] < 0 || et.dst[e] >= n_dst)
        throw ValidationError("build_graph: edge table " + name + " row " + std::to_string(e) +
                              ": target id " + std::to_string(et.dst[e]) + " out of range (" +
                              schema.node_types[et.step.target_type].name + " has " +
                              std::to_string(n_dst) + " nodes)");
    }

    EdgeSet es;
    es.src = std::move(et.src);
    es.dst = std::move(et.dst);
    es.features = std::move(et.features);
    g.edge_sets[si] = std::move(es);
  }

  // Build incoming indices and out-degree counts with a counting sort so
  // insertion order survives within each target bucket.
  for (size_t si = 0; si < schema.meta_steps.size(); ++si) {
    const MetaStep& s = schema.meta_steps[si];
    EdgeSet& es = g.edge_sets[si];
    const int n_dst = g.node_count(s.target_type);
    const int n_src = g.node_count(s.source_type);
    const int m = es.size();
    if (es.features.rows == 0 && es.features.cols == 0)
      es.features = DenseMatrix(0, schema.edge_type(s.edge_type).feature_dim());

    es.in_ptr.assign(n_dst + 1, 0);
    es.in_edges.assign(m, 0);
    es.out_count.assign(n_src, 0);
    for (int e = 0; e < m; ++e) {
      ++es.in_ptr[es.dst[e] + 1];
      ++es.out_count[es.src[e]];
    }
    for (int v = 0; v < n_dst; ++v) es.in_ptr[v + 1] += es.in_ptr[v];
    std::vector<int> cursor(es.in_ptr.begin(), es.in_ptr.end() - 1);
    for (int e = 0; e < m; ++e) es.in_edges[cursor[es.dst[e]]++] = e;
  }

  g.check();
  return g;
}

}  // namespace hmpnn
