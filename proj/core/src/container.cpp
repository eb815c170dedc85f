#include "hmpnn/container.hpp"

#include <filesystem>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hmpnn/files.hpp"

namespace hmpnn {

namespace fs = std::filesystem;

namespace {

std::string node_file(const HeteroSchema& s, int t) {
  return "nodes_" + s.node_types[t].name + ".csv";
}

std::string label_file(const HeteroSchema& s, int t) {
  return "labels_" + s.node_types[t].name + ".csv";
}

std::string edge_file(const HeteroSchema& s, int si) {
  return "edges_" + s.step_name(si) + ".csv";
}

std::string matrix_csv(const DenseMatrix& m, const std::string& header,
                       const std::vector<int>* ids = nullptr) {
  std::string out = header + "\n";
  for (int r = 0; r < m.rows; ++r) {
    out += std::to_string(ids ? (*ids)[r] : r);
    for (int c = 0; c < m.cols; ++c) {
      out += ',';
      out += format_double(m.at(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

void save_container(const HeteroGraph& graph, const std::string& dir) {
  graph.check();
  fs::create_directories(dir);
  const HeteroSchema& s = graph.schema;

  atomic_write_file((fs::path(dir) / "schema.json").string(), s.to_json().dump(2) + "\n");

  for (size_t t = 0; t < s.node_types.size(); ++t) {
    std::string header = "id";
    for (int c = 0; c < s.node_types[t].feature_dim(); ++c) header += ",f" + std::to_string(c);
    atomic_write_file((fs::path(dir) / node_file(s, static_cast<int>(t))).string(),
                      matrix_csv(graph.node_features[t], header));
  }

  for (size_t si = 0; si < s.meta_steps.size(); ++si) {
    const EdgeSet& es = graph.edge_sets[si];
    std::string out = "src_id,dst_id";
    for (int c = 0; c < es.features.cols; ++c) out += ",f" + std::to_string(c);
    out += '\n';
    for (int e = 0; e < es.size(); ++e) {
      out += std::to_string(es.src[e]);
      out += ',';
      out += std::to_string(es.dst[e]);
      for (int c = 0; c < es.features.cols; ++c) {
        out += ',';
        out += format_double(es.features.at(e, c));
      }
      out += '\n';
    }
    atomic_write_file((fs::path(dir) / edge_file(s, static_cast<int>(si))).string(), out);
  }

  for (size_t t = 0; t < graph.labels.size(); ++t) {
    if (graph.labels[t].empty()) continue;
    std::string out = "id,label\n";
    for (size_t v = 0; v < graph.labels[t].size(); ++v)
      out += std::to_string(v) + "," + std::to_string(graph.labels[t][v]) + "\n";
    atomic_write_file((fs::path(dir) / label_file(s, static_cast<int>(t))).string(), out);
  }
}

HeteroGraph load_container(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw ValidationError("container: " + dir + " is not a directory");
  const std::string schema_path = (root / "schema.json").string();
  if (!file_exists(schema_path)) throw ValidationError("container: missing " + schema_path);

  HeteroSchema schema;
  try {
    schema = HeteroSchema::from_json(nlohmann::json::parse(read_file(schema_path)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("container: cannot parse " + schema_path + ": " + e.what());
  }

  // Node tables. Ids map to dense indices in row order.
  std::vector<NodeTable> nodes;
  std::vector<std::unordered_map<long, int>> id_maps(schema.node_types.size());
  for (size_t t = 0; t < schema.node_types.size(); ++t) {
    const std::string fname = node_file(schema, static_cast<int>(t));
    const std::string path = (root / fname).string();
    if (!file_exists(path)) throw ValidationError("container: missing " + path);
    auto rows = read_csv(path);
    if (rows.empty()) throw ValidationError(fname + ": missing header row");
    const int dim = schema.node_types[t].feature_dim();
    if (static_cast<int>(rows[0].size()) != dim + 1)
      throw ValidationError(fname + ": header has " + std::to_string(rows[0].size()) +
                            " columns, expected " + std::to_string(dim + 1));
    NodeTable nt;
    nt.node_type = static_cast<int>(t);
    nt.features = DenseMatrix(static_cast<int>(rows.size()) - 1, dim);
    for (size_t r = 1; r < rows.size(); ++r) {
      const std::string ctx = fname + " row " + std::to_string(r);
      if (static_cast<int>(rows[r].size()) != dim + 1)
        throw ValidationError(ctx + ": has " + std::to_string(rows[r].size()) +
                              " cells, expected " + std::to_string(dim + 1));
      const long id = parse_long(rows[r][0], ctx);
      if (!id_maps[t].emplace(id, static_cast<int>(r) - 1).second)
        throw ValidationError(ctx + ": duplicate id " + std::to_string(id));
      for (int c = 0; c < dim; ++c)
        nt.features.at(static_cast<int>(r) - 1, c) = parse_double(rows[r][c + 1], ctx);
    }
    nodes.push_back(std::move(nt));
  }

  std::vector<EdgeTable> edges;
  for (size_t si = 0; si < schema.meta_steps.size(); ++si) {
    const MetaStep& s = schema.meta_steps[si];
    const std::string fname = edge_file(schema, static_cast<int>(si));
    const std::string path = (root / fname).string();
    if (!file_exists(path)) throw ValidationError("container: missing " + path);
    auto rows = read_csv(path);
    if (rows.empty()) throw ValidationError(fname + ": missing header row");
    const int dim = schema.edge_type(s.edge_type).feature_dim();
    if (static_cast<int>(rows[0].size()) != dim + 2)
      throw ValidationError(fname + ": header has " + std::to_string(rows[0].size()) +
                            " columns, expected " + std::to_string(dim + 2));
    EdgeTable et;
    et.step = s;
    et.features = DenseMatrix(static_cast<int>(rows.size()) - 1, dim);
    for (size_t r = 1; r < rows.size(); ++r) {
      const std::string ctx = fname + " row " + std::to_string(r);
      if (static_cast<int>(rows[r].size()) != dim + 2)
        throw ValidationError(ctx + ": has " + std::to_string(rows[r].size()) +
                              " cells, expected " + std::to_string(dim + 2));
      const long sid = parse_long(rows[r][0], ctx);
      const long did = parse_long(rows[r][1], ctx);
      auto sit = id_maps[s.source_type].find(sid);
      if (sit == id_maps[s.source_type].end())
        throw ValidationError(ctx + ": source id " + std::to_string(sid) + " not present in " +
                              node_file(schema, s.source_type));
      auto dit = id_maps[s.target_type].find(did);
      if (dit == id_maps[s.target_type].end())
        throw ValidationError(ctx + ": target id " + std::to_string(did) + " not present in " +
                              node_file(schema, s.target_type));
      et.src.push_back(sit->second);
      et.dst.push_back(dit->second);
      for (int c = 0; c < dim; ++c)
        et.features.at(static_cast<int>(r) - 1, c) = parse_double(rows[r][c + 2], ctx);
    }
    edges.push_back(std::move(et));
  }

  HeteroGraph g = build_graph(schema, std::move(nodes), std::move(edges));

  for (size_t t = 0; t < schema.node_types.size(); ++t) {
    const std::string fname = label_file(schema, static_cast<int>(t));
    const std::string path = (root / fname).string();
    if (!file_exists(path)) continue;
    auto rows = read_csv(path);
    if (rows.empty() || rows[0].size() != 2)
      throw ValidationError(fname + ": expected header id,label");
    std::vector<int> lab(g.node_count(static_cast<int>(t)), -1);
    for (size_t r = 1; r < rows.size(); ++r) {
      const std::string ctx = fname + " row " + std::to_string(r);
      if (rows[r].size() != 2) throw ValidationError(ctx + ": expected two cells");
      const long id = parse_long(rows[r][0], ctx);
      auto it = id_maps[t].find(id);
      if (it == id_maps[t].end())
        throw ValidationError(ctx + ": id " + std::to_string(id) + " not present in " +
                              node_file(schema, static_cast<int>(t)));
      const long y = parse_long(rows[r][1], ctx);
      if (y != 0 && y != 1) throw ValidationError(ctx + ": label must be 0 or 1");
      if (lab[it->second] != -1) throw ValidationError(ctx + ": duplicate label for id " +
                                                       std::to_string(id));
      lab[it->second] = static_cast<int>(y);
    }
    for (size_t v = 0; v < lab.size(); ++v)
      if (lab[v] == -1)
        throw ValidationError(fname + ": no label for node index " + std::to_string(v));
    g.labels[t] = std::move(lab);
  }

  g.check();
  return g;
}

}  // namespace hmpnn
