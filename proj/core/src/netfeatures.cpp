#include "hmpnn/netfeatures.hpp"

#include <algorithm>
#include <cmath>

#include "hmpnn/files.hpp"
#include "hmpnn/rng.hpp"

namespace hmpnn {

namespace {

struct AmlIndices {
  int ind, org, ext, txn, role;
  int step_out[3];  // (ind,txn,X) for X = ind/org/ext
  int step_in[3];   // (X,txn,ind)
  int step_role;    // (ind,role,org)
};

AmlIndices require_aml(const HeteroSchema& schema) {
  AmlIndices ix{};
  ix.ind = schema.node_type_index("individual");
  ix.org = schema.node_type_index("organization");
  ix.ext = schema.node_type_index("external");
  ix.txn = schema.edge_type_index("txn");
  ix.role = schema.edge_type_index("role");
  if (ix.ind < 0 || ix.org < 0 || ix.ext < 0 || ix.txn < 0 || ix.role < 0)
    throw ValidationError(
        "summary features need the transaction schema "
        "(individual/organization/external node types, txn/role edge types)");
  const int others[3] = {ix.ind, ix.org, ix.ext};
  for (int i = 0; i < 3; ++i) {
    ix.step_out[i] = schema.step_index({ix.ind, ix.txn, others[i]});
    ix.step_in[i] = schema.step_index({others[i], ix.txn, ix.ind});
    if (ix.step_out[i] < 0 || ix.step_in[i] < 0)
      throw ValidationError("summary features: schema lacks a txn meta step touching individuals");
  }
  ix.step_role = schema.step_index({ix.ind, ix.role, ix.org});
  if (ix.step_role < 0)
    throw ValidationError("summary features: schema lacks the individual role meta step");
  return ix;
}

}  // namespace

std::vector<std::string> unweighted_summary_names() {
  return {"uw_out_ind", "uw_out_org", "uw_out_ext", "uw_in_ind",  "uw_in_org", "uw_in_ext",
          "uw_out_role", "uw_total_in", "uw_total_out", "uw_total", "uw_active_steps"};
}

DenseMatrix unweighted_summary(const HeteroGraph& g) {
  const AmlIndices ix = require_aml(g.schema);
  const int n = g.node_count(ix.ind);
  DenseMatrix out(n, 11);
  for (int i = 0; i < 3; ++i) {
    const EdgeSet& es_out = g.edges(ix.step_out[i]);
    for (int e = 0; e < es_out.size(); ++e) out.at(es_out.src[e], i) += 1.0;
    const EdgeSet& es_in = g.edges(ix.step_in[i]);
    for (int e = 0; e < es_in.size(); ++e) out.at(es_in.dst[e], 3 + i) += 1.0;
  }
  const EdgeSet& es_role = g.edges(ix.step_role);
  for (int e = 0; e < es_role.size(); ++e) out.at(es_role.src[e], 6) += 1.0;
  for (int v = 0; v < n; ++v) {
    double* row = out.row(v);
    row[7] = row[3] + row[4] + row[5];
    row[8] = row[0] + row[1] + row[2] + row[6];
    row[9] = row[7] + row[8];
    int active = 0;
    for (int c = 0; c < 7; ++c)
      if (row[c] != 0.0) ++active;
    row[10] = active;
  }
  return out;
}

std::vector<std::string> weighted_summary_names() {
  return {"w_out_ind", "w_out_org", "w_out_ext", "w_in_ind",
          "w_in_org",  "w_in_ext",  "w_total_in", "w_total_out"};
}

DenseMatrix weighted_summary(const HeteroGraph& g) {
  const AmlIndices ix = require_aml(g.schema);
  const int n = g.node_count(ix.ind);
  DenseMatrix out(n, 8);
  for (int i = 0; i < 3; ++i) {
    const EdgeSet& es_out = g.edges(ix.step_out[i]);
    for (int e = 0; e < es_out.size(); ++e)
      out.at(es_out.src[e], i) += es_out.features.at(e, aml::kTxnAmount);
    const EdgeSet& es_in = g.edges(ix.step_in[i]);
    for (int e = 0; e < es_in.size(); ++e)
      out.at(es_in.dst[e], 3 + i) += es_in.features.at(e, aml::kTxnAmount);
  }
  for (int v = 0; v < n; ++v) {
    double* row = out.row(v);
    row[6] = row[3] + row[4] + row[5];
    row[7] = row[0] + row[1] + row[2];
  }
  return out;
}

int counterpart_degree_width(const HeteroSchema& schema, int node_type, int edge_type) {
  int w = 0;
  for (const MetaStep& s : schema.meta_steps) {
    if (s.edge_type != edge_type) continue;
    if (s.source_type == node_type) ++w;
    if (s.target_type == node_type) ++w;
  }
  return w;
}

DenseMatrix counterpart_degree_columns(const HeteroGraph& g, int node_type, int edge_type) {
  const HeteroSchema& schema = g.schema;
  const int n = g.node_count(node_type);
  DenseMatrix out(n, counterpart_degree_width(schema, node_type, edge_type));
  int col = 0;
  // Out columns by counterpart type index, then in columns.
  for (size_t t = 0; t < schema.node_types.size(); ++t) {
    const int si = schema.step_index({node_type, edge_type, static_cast<int>(t)});
    if (si < 0) continue;
    const EdgeSet& es = g.edges(si);
    for (int e = 0; e < es.size(); ++e) out.at(es.src[e], col) += 1.0;
    ++col;
  }
  for (size_t t = 0; t < schema.node_types.size(); ++t) {
    const int si = schema.step_index({static_cast<int>(t), edge_type, node_type});
    if (si < 0) continue;
    const EdgeSet& es = g.edges(si);
    for (int e = 0; e < es.size(); ++e) out.at(es.dst[e], col) += 1.0;
    ++col;
  }
  return out;
}

void MetaPath::validate(const HeteroSchema& schema) const {
  if (node_types.size() != edge_types.size() + 1 || edge_types.empty())
    throw ValidationError("meta path: needs n+1 node types for n edge types, n >= 1");
  for (int t : node_types)
    if (t < 0 || t >= static_cast<int>(schema.node_types.size()))
      throw ValidationError("meta path: node type index out of range");
  for (size_t i = 0; i < edge_types.size(); ++i) {
    const int e = edge_types[i];
    if (e < 0 || e >= static_cast<int>(schema.edge_types.size()))
      throw ValidationError("meta path: edge type index out of range");
    const MetaStep fwd{node_types[i], e, node_types[i + 1]};
    const MetaStep rev{node_types[i + 1], e, node_types[i]};
    if (!schema.has_step(fwd) && !schema.has_step(rev))
      throw ValidationError("meta path: no declared meta step joins " +
                            schema.node_type(node_types[i]).name + " and " +
                            schema.node_type(node_types[i + 1]).name + " over " +
                            schema.edge_type(e).name);
  }
}

std::string MetaPath::name(const HeteroSchema& schema) const {
  std::string out = schema.node_type(node_types[0]).name;
  for (size_t i = 0; i < edge_types.size(); ++i) {
    out += "-" + schema.edge_type(edge_types[i]).name;
    out += "-" + schema.node_type(node_types[i + 1]).name;
  }
  return out;
}

std::vector<MetaPath> default_meta_paths(const HeteroSchema& schema) {
  const int ind = schema.node_type_index("individual");
  const int org = schema.node_type_index("organization");
  const int ext = schema.node_type_index("external");
  const int txn = schema.edge_type_index("txn");
  const int role = schema.edge_type_index("role");
  if (ind < 0 || org < 0 || ext < 0 || txn < 0 || role < 0)
    throw ValidationError("default meta paths need the transaction schema");
  std::vector<MetaPath> paths;
  paths.push_back({{ind, ind, ind}, {txn, txn}});
  paths.push_back({{ind, org, ind}, {txn, txn}});
  paths.push_back({{ind, ext, ind}, {txn, txn}});
  paths.push_back({{ind, org, ind}, {role, txn}});
  for (auto& p : paths) p.validate(schema);
  return paths;
}

namespace {

// Undirected adjacency for one pattern transition (from, edge, to): forward
// edges of the declared step (from,e,to) plus reversed edges of (to,e,from).
struct TransitionAdj {
  std::vector<int> ptr;
  std::vector<int> nbr;
};

TransitionAdj build_transition(const HeteroGraph& g, int from_type, int edge_type, int to_type) {
  const int n = g.node_count(from_type);
  TransitionAdj adj;
  adj.ptr.assign(n + 1, 0);
  const int fwd = g.schema.step_index({from_type, edge_type, to_type});
  const int rev = g.schema.step_index({to_type, edge_type, from_type});
  if (fwd >= 0)
    for (int s : g.edges(fwd).src) ++adj.ptr[s + 1];
  if (rev >= 0)
    for (int d : g.edges(rev).dst) ++adj.ptr[d + 1];
  for (int v = 0; v < n; ++v) adj.ptr[v + 1] += adj.ptr[v];
  adj.nbr.assign(adj.ptr[n], 0);
  std::vector<int> cur(adj.ptr.begin(), adj.ptr.end() - 1);
  if (fwd >= 0) {
    const EdgeSet& es = g.edges(fwd);
    for (int e = 0; e < es.size(); ++e) adj.nbr[cur[es.src[e]]++] = es.dst[e];
  }
  if (rev >= 0) {
    const EdgeSet& es = g.edges(rev);
    for (int e = 0; e < es.size(); ++e) adj.nbr[cur[es.dst[e]]++] = es.src[e];
  }
  return adj;
}

}  // namespace

WalkCorpus generate_walks(const HeteroGraph& g, const MetaPath& path, const WalkConfig& cfg) {
  path.validate(g.schema);
  if (cfg.walk_length < 1 || cfg.walks_per_node < 1)
    throw ValidationError("walk config: walk_length and walks_per_node must be >= 1");

  const int steps = static_cast<int>(path.edge_types.size());
  const bool cyclic = path.node_types.front() == path.node_types.back();
  std::vector<TransitionAdj> adj;
  adj.reserve(steps);
  for (int i = 0; i < steps; ++i)
    adj.push_back(build_transition(g, path.node_types[i], path.edge_types[i],
                                   path.node_types[i + 1]));

  WalkCorpus corpus;
  corpus.path = path;
  const int n_start = g.node_count(path.node_types[0]);
  corpus.walks.reserve(static_cast<size_t>(n_start) * cfg.walks_per_node);
  for (int v = 0; v < n_start; ++v) {
    Rng rng(cfg.seed ^ static_cast<uint64_t>(v));
    for (int w = 0; w < cfg.walks_per_node; ++w) {
      std::vector<int> walk{v};
      int x = v;
      for (int p = 0; p < cfg.walk_length; ++p) {
        if (!cyclic && p >= steps) break;
        const TransitionAdj& a = adj[p % steps];
        const int lo = a.ptr[x], hi = a.ptr[x + 1];
        if (lo == hi) break;
        x = a.nbr[lo + rng.pick(hi - lo)];
        walk.push_back(x);
      }
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

EmbeddingTable::EmbeddingTable(const HeteroGraph& g, const MetaPath& path, int dim) {
  const HeteroSchema& schema = g.schema;
  offset_.assign(schema.node_types.size(), -1);
  size_.assign(schema.node_types.size(), 0);
  std::vector<char> in_path(schema.node_types.size(), 0);
  for (int t : path.node_types) in_path[t] = 1;
  int total = 0;
  for (size_t t = 0; t < schema.node_types.size(); ++t) {
    if (!in_path[t]) continue;
    offset_[t] = total;
    size_[t] = g.node_count(static_cast<int>(t));
    total += size_[t];
  }
  visited_.assign(total, 0);
  center_ = DenseMatrix(total, dim);
  context_ = DenseMatrix(total, dim);
}

int EmbeddingTable::row_of(int node_type, int node) const {
  if (offset_.at(node_type) < 0)
    throw ValidationError("embedding table: node type not in the meta path vocabulary");
  if (node < 0 || node >= size_[node_type])
    throw ValidationError("embedding table: node index out of range");
  return offset_[node_type] + node;
}

int EmbeddingTable::visited_count(int node_type) const {
  if (offset_.at(node_type) < 0) return 0;
  int n = 0;
  for (int v = 0; v < size_[node_type]; ++v)
    if (visited_[offset_[node_type] + v]) ++n;
  return n;
}

int EmbeddingTable::type_size(int node_type) const { return size_.at(node_type); }

void EmbeddingTable::zero_unvisited() {
  for (size_t r = 0; r < visited_.size(); ++r) {
    if (visited_[r]) continue;
    for (int c = 0; c < center_.cols; ++c) center_.at(static_cast<int>(r), c) = 0.0;
    for (int c = 0; c < context_.cols; ++c) context_.at(static_cast<int>(r), c) = 0.0;
  }
}

namespace {

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

EmbeddingTable train_skipgram(const HeteroGraph& g, const WalkCorpus& corpus,
                              const SkipGramConfig& cfg) {
  if (cfg.dim < 1 || cfg.context_radius < 1 || cfg.negatives < 0 || cfg.epochs < 1)
    throw ValidationError("skip-gram config: dim, context_radius, epochs must be >= 1");
  const HeteroSchema& schema = g.schema;
  const MetaPath& path = corpus.path;
  path.validate(schema);

  EmbeddingTable table(g, path, cfg.dim);

  DenseMatrix& center = table.center();
  DenseMatrix& context = table.context();
  Rng rng(cfg.seed);
  for (int r = 0; r < center.rows; ++r)
    for (int c = 0; c < cfg.dim; ++c)
      center.at(r, c) = rng.uniform(-0.5, 0.5) / cfg.dim;

  // Node type (hence vocabulary row block) per walk position; cyclic paths
  // wrap the pattern, finite ones index it directly.
  const int pat = static_cast<int>(path.edge_types.size());
  const bool cyclic = path.node_types.front() == path.node_types.back();
  auto type_at = [&](int pos) {
    return cyclic ? path.node_types[pos % pat] : path.node_types[pos];
  };

  // Total number of window pairs, for the linear learning rate schedule.
  long total_pairs = 0;
  for (const auto& walk : corpus.walks) {
    const int len = static_cast<int>(walk.size());
    if (len < 2) continue;
    for (int i = 0; i < len; ++i) {
      const int lo = std::max(0, i - cfg.context_radius);
      const int hi = std::min(len - 1, i + cfg.context_radius);
      total_pairs += hi - lo;
    }
  }
  total_pairs *= cfg.epochs;
  if (total_pairs == 0) {
    table.zero_unvisited();
    return table;
  }

  for (const auto& walk : corpus.walks) {
    if (walk.size() < 2) continue;
    for (size_t i = 0; i < walk.size(); ++i) table.mark_visited(type_at(static_cast<int>(i)),
                                                               walk[i]);
  }

  std::vector<double> accum(cfg.dim);
  long done = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& walk : corpus.walks) {
      const int len = static_cast<int>(walk.size());
      if (len < 2) continue;
      for (int i = 0; i < len; ++i) {
        const int crow = table.row_of(type_at(i), walk[i]);
        double* cvec = center.row(crow);
        const int lo = std::max(0, i - cfg.context_radius);
        const int hi = std::min(len - 1, i + cfg.context_radius);
        for (int j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const double frac = static_cast<double>(done) / static_cast<double>(total_pairs);
          const double lr = std::max(cfg.lr * (1.0 - frac), cfg.lr_min);
          ++done;
          const int ctype = type_at(j);
          const int orow = table.row_of(ctype, walk[j]);
          std::fill(accum.begin(), accum.end(), 0.0);
          // Positive pair, then uniform negatives drawn from the context
          // node's type.
          for (int s = 0; s <= cfg.negatives; ++s) {
            int row;
            double label;
            if (s == 0) {
              row = orow;
              label = 1.0;
            } else {
              row = table.row_of(ctype, rng.pick(table.type_size(ctype)));
              label = 0.0;
            }
            double* ovec = context.row(row);
            const double f = dot(cvec, ovec, cfg.dim);
            const double gscale = (label - sigmoid_scalar(f)) * lr;
            for (int d = 0; d < cfg.dim; ++d) {
              accum[d] += gscale * ovec[d];
              ovec[d] += gscale * cvec[d];
            }
          }
          for (int d = 0; d < cfg.dim; ++d) cvec[d] += accum[d];
        }
      }
    }
  }

  table.zero_unvisited();
  return table;
}

double skipgram_pair_loss(const EmbeddingTable& table, int center_row, int context_row,
                          const std::vector<int>& negative_rows) {
  const int dim = table.center().cols;
  const double* c = table.center().row(center_row);
  double loss = -std::log(sigmoid_scalar(dot(c, table.context().row(context_row), dim)));
  for (int nrow : negative_rows)
    loss -= std::log(sigmoid_scalar(-dot(c, table.context().row(nrow), dim)));
  return loss;
}

FeatureTable assemble_features(const HeteroGraph& g, const FeatureConfig& cfg,
                               std::vector<CoverageEntry>* coverage) {
  const AmlIndices ix = require_aml(g.schema);
  const int n = g.node_count(ix.ind);

  std::vector<DenseMatrix> blocks;
  std::vector<std::string> names;

  if (cfg.intrinsic) {
    blocks.push_back(g.node_features[ix.ind]);
    for (const std::string& f : g.schema.node_type(ix.ind).feature_names)
      names.push_back("intrinsic_" + f);
  }
  if (cfg.unweighted) {
    blocks.push_back(unweighted_summary(g));
    for (auto& s : unweighted_summary_names()) names.push_back(s);
  }
  if (cfg.weighted) {
    blocks.push_back(weighted_summary(g));
    for (auto& s : weighted_summary_names()) names.push_back(s);
  }
  if (cfg.embeddings) {
    std::vector<MetaPath> paths = cfg.paths.empty() ? default_meta_paths(g.schema) : cfg.paths;
    for (size_t p = 0; p < paths.size(); ++p) {
      WalkCorpus corpus = generate_walks(g, paths[p], cfg.walk);
      SkipGramConfig sg = cfg.skipgram;
      sg.seed = cfg.skipgram.seed + p;  // independent init and negatives per path
      EmbeddingTable table = train_skipgram(g, corpus, sg);
      // Walk-start and walk-end blocks both read the trained center table;
      // the vocabulary has a single row per node either way.
      DenseMatrix block(n, 2 * sg.dim);
      for (int v = 0; v < n; ++v) {
        const int row = table.row_of(ix.ind, v);
        for (int d = 0; d < sg.dim; ++d) {
          block.at(v, d) = table.center().at(row, d);
          block.at(v, sg.dim + d) = table.center().at(row, d);
        }
      }
      blocks.push_back(std::move(block));
      const std::string tag = "m2v" + std::to_string(p);
      for (int d = 0; d < sg.dim; ++d) names.push_back(tag + "_start" + std::to_string(d));
      for (int d = 0; d < sg.dim; ++d) names.push_back(tag + "_end" + std::to_string(d));
      if (coverage)
        coverage->push_back({paths[p].name(g.schema), table.visited_count(ix.ind), n});
    }
  }

  int width = 0;
  for (const auto& b : blocks) width += b.cols;
  FeatureTable out;
  out.names = std::move(names);
  out.values = DenseMatrix(n, width);
  int off = 0;
  for (const auto& b : blocks) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < b.cols; ++c) out.values.at(r, off + c) = b.at(r, c);
    off += b.cols;
  }
  return out;
}

void save_feature_table(const std::string& path, const FeatureTable& table) {
  if (static_cast<int>(table.names.size()) != table.values.cols)
    throw ValidationError("feature table: name count does not match width");
  std::string out = "id";
  for (const auto& s : table.names) out += "," + s;
  out += '\n';
  for (int r = 0; r < table.values.rows; ++r) {
    out += std::to_string(r);
    for (int c = 0; c < table.values.cols; ++c) {
      out += ',';
      out += format_double(table.values.at(r, c));
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

FeatureTable load_feature_table(const std::string& path) {
  auto rows = read_csv(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "id")
    throw ValidationError("feature table " + path + ": expected header id,<columns>");
  FeatureTable t;
  const int width = static_cast<int>(rows[0].size()) - 1;
  for (int c = 0; c < width; ++c) t.names.push_back(rows[0][c + 1]);
  t.values = DenseMatrix(static_cast<int>(rows.size()) - 1, width);
  for (size_t r = 1; r < rows.size(); ++r) {
    const std::string ctx = path + " row " + std::to_string(r);
    if (rows[r].size() != rows[0].size())
      throw ValidationError(ctx + ": widths differ from header");
    const long id = parse_long(rows[r][0], ctx);
    if (id != static_cast<long>(r) - 1)
      throw ValidationError(ctx + ": ids must be dense and in order");
    for (int c = 0; c < width; ++c)
      t.values.at(static_cast<int>(r) - 1, c) = parse_double(rows[r][c + 1], ctx);
  }
  return t;
}

}  // namespace hmpnn
