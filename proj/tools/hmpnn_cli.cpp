// Command line front end: generate | features | tune | train | evaluate |
// report | gradcheck. A JSON config file supplies defaults for any long
// option of the chosen subcommand; explicit flags win. Exit codes: 0 ok,
// 2 bad input or config, 3 numeric failure.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hmpnn/checkpoint.hpp"
#include "hmpnn/container.hpp"
#include "hmpnn/errors.hpp"
#include "hmpnn/files.hpp"
#include "hmpnn/gradcheck.hpp"
#include "hmpnn/metrics.hpp"
#include "hmpnn/model.hpp"
#include "hmpnn/netfeatures.hpp"
#include "hmpnn/rng.hpp"
#include "hmpnn/split.hpp"
#include "hmpnn/synthgen.hpp"
#include "hmpnn/trainer.hpp"

namespace {

using nlohmann::json;
using namespace hmpnn;

json load_config(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      path = arg.substr(9);
  }
  if (path.empty()) return json::object();
  json j = json::parse(read_file(path));
  if (!j.is_object()) throw ValidationError(path + ": config must be a JSON object");
  return j;
}

// Applies a config value as the pre-parse default, so command line flags
// override it.
template <typename T>
void from_config(const json& cfg, const char* key, T& var) {
  if (cfg.contains(key)) {
    try {
      var = cfg.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

struct GlobalArgs {
  std::string out;
  uint64_t seed = 0;
  int jobs = 1;
  bool quiet = false;
};

struct LoadedData {
  HeteroGraph graph;
  FeatureTable features;  // empty unless an entity model asked for it
  Dataset view;
};

const std::vector<int>& labels_of(const HeteroGraph& g, int labeled_type) {
  const auto& labels = g.labels.at(labeled_type);
  if (labels.empty())
    throw ValidationError("graph has no labels for node type '" +
                          g.schema.node_types.at(labeled_type).name + "'");
  return labels;
}

LoadedData load_data(const std::string& graph_dir, std::string features_path, ModelKind kind) {
  LoadedData d;
  d.graph = load_container(graph_dir);
  d.view.graph = &d.graph;
  if (!is_graph_model(kind)) {
    if (features_path.empty()) features_path = graph_dir + "/features_individual.csv";
    d.features = load_feature_table(features_path);
    if (d.features.values.rows != d.graph.node_count(aml::kIndividual))
      throw ValidationError(features_path + ": row count does not match the graph");
    d.view.features = &d.features.values;
  }
  return d;
}

ModelConfig make_model_config(const std::string& model, int layers, bool extra_degree,
                              const LoadedData& data) {
  ModelConfig mc;
  mc.kind = model_kind_from_string(model);
  mc.layers = layers;
  mc.extra_degree_features = extra_degree;
  if (!is_graph_model(mc.kind)) mc.entity_input_dim = data.features.values.cols;
  return mc;
}

// Small labeled graph for gradient checking.
HeteroGraph gradcheck_graph(int nodes, uint64_t seed) {
  GenConfig gc;
  gc.n_individual = std::max(25, nodes * 3 / 5);
  gc.n_organization = std::max(2, nodes / 5);
  gc.n_external = std::max(3, nodes - gc.n_individual - gc.n_organization);
  gc.prevalence = 0.1;
  return generate(gc, seed);
}

std::string train_log_csv(const std::vector<TrainLogEntry>& log) {
  std::string out = "iter,train_loss,val_pr_auc\n";
  for (const TrainLogEntry& e : log) {
    out += std::to_string(e.iter) + ',' + format_double(e.train_loss) + ',';
    if (e.val_pr_auc >= 0.0) out += format_double(e.val_pr_auc);
    out += '\n';
  }
  return out;
}

void require_out(const GlobalArgs& g, const char* cmd) {
  if (g.out.empty())
    throw ValidationError(std::string(cmd) + ": --out is required");
}

int run(int argc, char** argv) {
  const json cfg = load_config(argc, argv);

  CLI::App app{"heterogeneous transaction-graph model lab"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  std::string config_path;
  from_config(cfg, "out", g.out);
  from_config(cfg, "seed", g.seed);
  from_config(cfg, "jobs", g.jobs);
  from_config(cfg, "quiet", g.quiet);
  app.add_option("--config", config_path, "JSON file with defaults for any long option");
  app.add_option("--out", g.out, "output file or directory");
  app.add_option("--seed", g.seed, "seed for every random choice in the run");
  app.add_option("--jobs", g.jobs, "worker threads for independent runs")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  // generate
  auto* cmd_gen = app.add_subcommand("generate", "write a synthetic transaction graph container");
  GenConfig gen;
  from_config(cfg, "n_individual", gen.n_individual);
  from_config(cfg, "n_organization", gen.n_organization);
  from_config(cfg, "n_external", gen.n_external);
  from_config(cfg, "prevalence", gen.prevalence);
  from_config(cfg, "spending_rate", gen.spending_rate);
  from_config(cfg, "p2p_rate", gen.p2p_rate);
  from_config(cfg, "ext_out_rate", gen.ext_out_rate);
  from_config(cfg, "ext_in_rate", gen.ext_in_rate);
  from_config(cfg, "org_org_rate", gen.org_org_rate);
  from_config(cfg, "org_ext_rate", gen.org_ext_rate);
  from_config(cfg, "merchant_fraction", gen.merchant_fraction);
  from_config(cfg, "forwarder_fraction", gen.forwarder_fraction);
  from_config(cfg, "smurf_weight", gen.smurf_weight);
  from_config(cfg, "cycle_weight", gen.cycle_weight);
  from_config(cfg, "role_abuse_weight", gen.role_abuse_weight);
  cmd_gen->add_option("--n_individual", gen.n_individual, "individual account count");
  cmd_gen->add_option("--n_organization", gen.n_organization, "organization count");
  cmd_gen->add_option("--n_external", gen.n_external, "external endpoint count");
  cmd_gen->add_option("--prevalence", gen.prevalence, "flagged fraction of individuals");
  cmd_gen->add_option("--spending_rate", gen.spending_rate, "spending txns per individual");
  cmd_gen->add_option("--p2p_rate", gen.p2p_rate, "person-to-person txns per individual");
  cmd_gen->add_option("--ext_out_rate", gen.ext_out_rate, "outbound external txns per individual");
  cmd_gen->add_option("--ext_in_rate", gen.ext_in_rate, "inbound external txns per individual");
  cmd_gen->add_option("--org_org_rate", gen.org_org_rate, "org-to-org txns per organization");
  cmd_gen->add_option("--org_ext_rate", gen.org_ext_rate,
                      "org-external txns per organization, each direction");
  cmd_gen->add_option("--merchant_fraction", gen.merchant_fraction, "merchant share of individuals");
  cmd_gen->add_option("--forwarder_fraction", gen.forwarder_fraction,
                      "forwarder share of individuals");
  cmd_gen->add_option("--smurf_weight", gen.smurf_weight, "relative smurfing frequency");
  cmd_gen->add_option("--cycle_weight", gen.cycle_weight, "relative cycle frequency");
  cmd_gen->add_option("--role_abuse_weight", gen.role_abuse_weight, "relative role-abuse frequency");

  // features
  auto* cmd_feat = app.add_subcommand("features", "assemble the per-individual feature table");
  std::string feat_graph;
  int m2v_epochs = 5, m2v_walks = 10, m2v_walk_length = 20;
  from_config(cfg, "graph", feat_graph);
  from_config(cfg, "m2v_epochs", m2v_epochs);
  from_config(cfg, "m2v_walks", m2v_walks);
  from_config(cfg, "m2v_walk_length", m2v_walk_length);
  cmd_feat->add_option("--graph", feat_graph, "graph container directory")->required();
  cmd_feat->add_option("--m2v_epochs", m2v_epochs, "embedding training epochs");
  cmd_feat->add_option("--m2v_walks", m2v_walks, "walks per start node");
  cmd_feat->add_option("--m2v_walk_length", m2v_walk_length, "steps per walk");

  // shared model options for tune / train / evaluate / gradcheck
  std::string opt_graph, opt_features, opt_model = "hmpnn-ct", opt_checkpoint, opt_hypers;
  int opt_layers = 1, opt_folds = 5, opt_iters = -1, opt_nodes = 50;
  bool opt_extra_degree = false;
  double opt_train_ratio = 0.7, opt_tol = 1e-4, opt_fd_h = 1e-6;
  HyperGrid grid;
  Hyper hyper;
  from_config(cfg, "graph", opt_graph);
  from_config(cfg, "features", opt_features);
  from_config(cfg, "model", opt_model);
  from_config(cfg, "layers", opt_layers);
  from_config(cfg, "extra_degree", opt_extra_degree);
  from_config(cfg, "train_ratio", opt_train_ratio);
  from_config(cfg, "folds", opt_folds);
  from_config(cfg, "lrs", grid.lrs);
  from_config(cfg, "l2s", grid.l2s);
  from_config(cfg, "max_iter", grid.max_iter);
  from_config(cfg, "eval_every", grid.eval_every);
  from_config(cfg, "patience", grid.patience);
  from_config(cfg, "lr", hyper.lr);
  from_config(cfg, "l2", hyper.l2);
  from_config(cfg, "iters", opt_iters);
  from_config(cfg, "hypers", opt_hypers);
  from_config(cfg, "checkpoint", opt_checkpoint);
  from_config(cfg, "nodes", opt_nodes);
  from_config(cfg, "tol", opt_tol);
  from_config(cfg, "fd_h", opt_fd_h);

  auto add_model_opts = [&](CLI::App* cmd) {
    cmd->add_option("--model", opt_model, "logreg | mlp | hgraphsage | hmpnn-sum | hmpnn-ct");
    cmd->add_option("--layers", opt_layers, "message passing / hidden layer count")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--extra_degree", opt_extra_degree,
                  "hgraphsage: append per-counterpart-type txn degree features");
  };

  auto* cmd_tune = app.add_subcommand("tune", "grid search lr and l2 with k-fold CV");
  cmd_tune->add_option("--graph", opt_graph, "graph container directory")->required();
  cmd_tune->add_option("--features", opt_features, "feature table for entity models");
  add_model_opts(cmd_tune);
  cmd_tune->add_option("--train_ratio", opt_train_ratio, "train share of the labeled nodes");
  cmd_tune->add_option("--folds", opt_folds, "CV fold count")->check(CLI::Range(2, 100));
  cmd_tune->add_option("--lrs", grid.lrs, "learning rate grid");
  cmd_tune->add_option("--l2s", grid.l2s, "l2 strength grid");
  cmd_tune->add_option("--max_iter", grid.max_iter, "iteration cap per run");
  cmd_tune->add_option("--eval_every", grid.eval_every, "iterations between validations");
  cmd_tune->add_option("--patience", grid.patience, "validations without improvement to stop");

  auto* cmd_train = app.add_subcommand("train", "fit one model and write a checkpoint");
  cmd_train->add_option("--graph", opt_graph, "graph container directory")->required();
  cmd_train->add_option("--features", opt_features, "feature table for entity models");
  add_model_opts(cmd_train);
  cmd_train->add_option("--train_ratio", opt_train_ratio, "train share of the labeled nodes");
  auto* train_hypers = cmd_train->add_option("--hypers", opt_hypers, "best_hypers.json from tune");
  auto* train_lr = cmd_train->add_option("--lr", hyper.lr, "learning rate");
  auto* train_l2 = cmd_train->add_option("--l2", hyper.l2, "l2 strength");
  auto* train_iters =
      cmd_train->add_option("--iters", opt_iters, "exact step count; omit to early stop");
  cmd_train->add_option("--max_iter", grid.max_iter, "iteration cap when early stopping");
  cmd_train->add_option("--eval_every", grid.eval_every, "iterations between validations");
  cmd_train->add_option("--patience", grid.patience, "validations without improvement to stop");

  auto* cmd_eval = app.add_subcommand("evaluate", "score a checkpoint on the held-out test side");
  cmd_eval->add_option("--graph", opt_graph, "graph container directory")->required();
  cmd_eval->add_option("--features", opt_features, "feature table for entity models");
  cmd_eval->add_option("--checkpoint", opt_checkpoint, "checkpoint.json from train")->required();
  cmd_eval->add_option("--train_ratio", opt_train_ratio, "train share used at training time");

  auto* cmd_report = app.add_subcommand("report", "render metrics files as a text table");
  std::vector<std::string> report_inputs;
  from_config(cfg, "inputs", report_inputs);
  cmd_report->add_option("inputs", report_inputs, "metrics.csv files")->expected(-1);

  auto* cmd_grad = app.add_subcommand("gradcheck", "finite-difference check of one model config");
  add_model_opts(cmd_grad);
  cmd_grad->add_option("--nodes", opt_nodes, "node count of the check graph")
      ->check(CLI::PositiveNumber);
  cmd_grad->add_option("--tol", opt_tol, "max relative error allowed");
  cmd_grad->add_option("--fd_h", opt_fd_h, "finite difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_gen->parsed()) {
    require_out(g, "generate");
    GenReport rep;
    HeteroGraph graph = generate(gen, g.seed, &rep);
    save_container(graph, g.out);
    atomic_write_file(g.out + "/gen_report.txt", rep.to_text(graph.schema));
    if (!g.quiet) {
      std::printf("wrote %s: %d individuals, %d organizations, %d externals, %d edges\n",
                  g.out.c_str(), graph.node_count(aml::kIndividual),
                  graph.node_count(aml::kOrganization), graph.node_count(aml::kExternal),
                  graph.total_edges());
      std::fputs(rep.to_text(graph.schema).c_str(), stdout);
    }
    return 0;
  }

  if (cmd_feat->parsed()) {
    HeteroGraph graph = load_container(feat_graph);
    FeatureConfig fc;
    fc.walk.seed = g.seed;
    fc.walk.walks_per_node = m2v_walks;
    fc.walk.walk_length = m2v_walk_length;
    fc.skipgram.seed = g.seed;
    fc.skipgram.epochs = m2v_epochs;
    std::vector<CoverageEntry> coverage;
    FeatureTable table = assemble_features(graph, fc, &coverage);
    const std::string out = g.out.empty() ? feat_graph + "/features_individual.csv" : g.out;
    save_feature_table(out, table);
    if (!g.quiet) {
      std::printf("wrote %s: %d rows, %d columns\n", out.c_str(), table.values.rows,
                  table.values.cols);
      for (const CoverageEntry& c : coverage)
        std::printf("  %s: %d of %d individuals visited\n", c.path.c_str(), c.visited, c.total);
    }
    return 0;
  }

  if (cmd_tune->parsed()) {
    require_out(g, "tune");
    const ModelKind kind = model_kind_from_string(opt_model);
    LoadedData data = load_data(opt_graph, opt_features, kind);
    const ModelConfig mc = make_model_config(opt_model, opt_layers, opt_extra_degree, data);
    const std::vector<int>& labels = labels_of(data.graph, mc.labeled_type);
    const SplitSpec split = stratified_split(labels, opt_train_ratio, g.seed);
    const GridResult res =
        grid_search(mc, data.view, labels, split.train, grid, opt_folds, g.seed, g.jobs);

    std::string csv = cv_csv_header() + "\n";
    for (const CvRow& row : res.table) csv += cv_csv_line(row) + "\n";
    atomic_write_file(g.out + "/cv_table.csv", csv);

    json best;
    best["model"] = opt_model;
    best["layers"] = opt_layers;
    best["extra_degree"] = opt_extra_degree;
    best["lr"] = res.best.lr;
    best["l2"] = res.best.l2;
    best["stop_iter"] = res.median_stop_iter;
    best["mean_val_pr_auc"] = res.best_mean_val_pr_auc;
    best["folds"] = opt_folds;
    best["train_ratio"] = opt_train_ratio;
    best["seed"] = g.seed;
    atomic_write_file(g.out + "/best_hypers.json", best.dump(2) + "\n");
    if (!g.quiet)
      std::printf("%s layers=%d: best lr=%s l2=%s stop_iter=%d mean val pr_auc=%s\n",
                  opt_model.c_str(), opt_layers, format_double(res.best.lr).c_str(),
                  format_double(res.best.l2).c_str(), res.median_stop_iter,
                  format_double(res.best_mean_val_pr_auc).c_str());
    return 0;
  }

  if (cmd_train->parsed()) {
    require_out(g, "train");
    const ModelKind kind = model_kind_from_string(opt_model);
    LoadedData data = load_data(opt_graph, opt_features, kind);
    const ModelConfig mc = make_model_config(opt_model, opt_layers, opt_extra_degree, data);
    const std::vector<int>& labels = labels_of(data.graph, mc.labeled_type);
    const SplitSpec split = stratified_split(labels, opt_train_ratio, g.seed);

    if (train_hypers->count()) {
      const json j = json::parse(read_file(opt_hypers));
      if (!train_lr->count()) hyper.lr = j.at("lr").get<double>();
      if (!train_l2->count()) hyper.l2 = j.at("l2").get<double>();
      if (!train_iters->count()) opt_iters = j.at("stop_iter").get<int>();
    }
    hyper.max_iter = grid.max_iter;
    hyper.eval_every = grid.eval_every;
    hyper.patience = grid.patience;

    std::vector<TrainLogEntry> log;
    ParamStore params;
    if (opt_iters >= 0) {
      params = fit_fixed(mc, data.view, labels, split.train, opt_iters, hyper, g.seed, &log);
    } else {
      // Carve a validation fifth out of the train side for early stopping.
      const std::vector<int> sub_labels = gather(labels, split.train);
      const SplitSpec inner = stratified_split(sub_labels, 0.8, g.seed);
      std::vector<int> tr, va;
      for (int p : inner.train) tr.push_back(split.train[p]);
      for (int p : inner.test) va.push_back(split.train[p]);
      TrainResult r = train(mc, data.view, labels, tr, va, hyper, g.seed);
      params = std::move(r.params);
      log = std::move(r.log);
      opt_iters = r.stop_iter;
    }

    Checkpoint ckpt;
    ckpt.meta.model = opt_model;
    ckpt.meta.layers = opt_layers;
    ckpt.meta.seed = g.seed;
    ckpt.meta.schema_hash = data.graph.schema.hash();
    ckpt.meta.hidden_dim = mc.hidden_dim;
    ckpt.meta.extra_degree_features = mc.extra_degree_features;
    ckpt.meta.entity_input_dim = mc.entity_input_dim;
    ckpt.params = std::move(params);
    save_checkpoint(g.out + "/checkpoint.json", ckpt);
    atomic_write_file(g.out + "/train_log.csv", train_log_csv(log));
    if (!g.quiet)
      std::printf("wrote %s/checkpoint.json (%s layers=%d, %d steps)\n", g.out.c_str(),
                  opt_model.c_str(), opt_layers, opt_iters);
    return 0;
  }

  if (cmd_eval->parsed()) {
    require_out(g, "evaluate");
    const Checkpoint ckpt = load_checkpoint(opt_checkpoint);
    const ModelKind kind = model_kind_from_string(ckpt.meta.model);
    LoadedData data = load_data(opt_graph, opt_features, kind);
    if (ckpt.meta.schema_hash != data.graph.schema.hash())
      throw ValidationError(opt_checkpoint + ": checkpoint schema does not match the graph");
    ModelConfig mc;
    mc.kind = kind;
    mc.layers = ckpt.meta.layers;
    mc.hidden_dim = ckpt.meta.hidden_dim;
    mc.extra_degree_features = ckpt.meta.extra_degree_features;
    mc.entity_input_dim = ckpt.meta.entity_input_dim;
    if (!is_graph_model(kind) && data.features.values.cols != mc.entity_input_dim)
      throw ValidationError("feature table width does not match the checkpoint");

    const std::vector<int>& labels = labels_of(data.graph, mc.labeled_type);
    const SplitSpec split = stratified_split(labels, opt_train_ratio, ckpt.meta.seed);
    const std::vector<double> scores = predict(data.view, mc, ckpt.params);
    const MetricsRow row =
        compute_metrics_row(ckpt.meta.model, ckpt.meta.layers, ckpt.meta.seed,
                            gather(scores, split.test), gather(labels, split.test));
    atomic_write_file(g.out, metrics_csv_header() + "\n" + metrics_csv_line(row) + "\n");
    if (!g.quiet)
      std::printf("%s layers=%d seed=%llu: test pr_auc=%s roc_auc=%s -> %s\n",
                  row.model.c_str(), row.layers, static_cast<unsigned long long>(row.seed),
                  format_double(row.pr).c_str(), format_double(row.roc).c_str(), g.out.c_str());
    return 0;
  }

  if (cmd_report->parsed()) {
    if (report_inputs.empty()) throw ValidationError("report: needs at least one metrics file");
    std::vector<MetricsRow> rows;
    for (const std::string& path : report_inputs) {
      std::vector<MetricsRow> part = parse_metrics_csv(read_file(path), path);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    const std::string text = render_report(rows);
    if (!g.out.empty()) atomic_write_file(g.out, text);
    if (g.out.empty() || !g.quiet) std::fputs(text.c_str(), stdout);
    return 0;
  }

  if (cmd_grad->parsed()) {
    const HeteroGraph graph = gradcheck_graph(opt_nodes, g.seed);
    ModelConfig mc;
    mc.kind = model_kind_from_string(opt_model);
    mc.layers = opt_layers;
    mc.extra_degree_features = opt_extra_degree;
    Dataset view;
    view.graph = &graph;
    DenseMatrix random_features;
    if (!is_graph_model(mc.kind)) {
      random_features = DenseMatrix(graph.node_count(aml::kIndividual), mc.entity_input_dim);
      Rng rng(g.seed + 1);
      for (double& v : random_features.data) v = rng.normal();
      view.features = &random_features;
    }
    std::vector<double> labels;
    for (int y : labels_of(graph, mc.labeled_type)) labels.push_back(y);

    ParamStore params = init_params(graph.schema, mc, g.seed);
    const auto build = [&](ad::Tape& tape, const ParamStore& p) {
      return tape.bce_loss(forward(tape, view, mc, p), labels);
    };
    const GradCheckReport rep = finite_diff_check(params, build, opt_fd_h);
    if (!g.quiet)
      for (const auto& t : rep.per_tensor)
        std::printf("  %-40s max rel err %.3e\n", t.name.c_str(), t.max_rel_err);
    std::printf("%s layers=%d: max rel err %.3e in %s (tolerance %.1e)\n", opt_model.c_str(),
                opt_layers, rep.max_rel_err, rep.worst_tensor.c_str(), opt_tol);
    if (!(rep.max_rel_err < opt_tol))
      throw NumericError("gradcheck failed: " + std::to_string(rep.max_rel_err) + " >= tolerance");
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
