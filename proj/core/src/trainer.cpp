#include "hmpnn/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "hmpnn/errors.hpp"
#include "hmpnn/files.hpp"
#include "hmpnn/metrics.hpp"
#include "hmpnn/optim.hpp"

namespace hmpnn {

std::vector<double> gather(const std::vector<double>& values, const std::vector<int>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(values.at(i));
  return out;
}

std::vector<int> gather(const std::vector<int>& values, const std::vector<int>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(values.at(i));
  return out;
}

namespace {

const HeteroSchema& schema_of(const Dataset& data, const ModelConfig& cfg) {
  static const HeteroSchema fallback = aml_schema();
  if (data.graph) return data.graph->schema;
  if (is_graph_model(cfg.kind))
    throw ValidationError("train: graph model needs a graph dataset");
  return fallback;
}

std::vector<double> labels_as_double(const std::vector<int>& labels,
                                     const std::vector<int>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(static_cast<double>(labels.at(i)));
  return out;
}

// Column 0 of the score tensor as a plain vector.
std::vector<double> score_column(const ad::Tape& tape, ad::Tensor scores) {
  const DenseMatrix& m = tape.value(scores);
  std::vector<double> out(m.rows);
  for (int r = 0; r < m.rows; ++r) out[r] = m.at(r, 0);
  return out;
}

void run_tasks(int n_tasks, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (int t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= n_tasks) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(jobs, n_tasks);
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

TrainResult train(const ModelConfig& cfg, const Dataset& data, const std::vector<int>& labels,
                  const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                  const Hyper& hyper, uint64_t seed) {
  if (train_idx.empty()) throw ValidationError("train: empty train set");
  if (val_idx.empty()) throw ValidationError("train: empty validation set");
  const HeteroSchema& schema = schema_of(data, cfg);
  ParamStore params = init_params(schema, cfg, seed);
  Adam adam(params, {hyper.lr, 0.9, 0.999, 1e-8, hyper.l2});

  const std::vector<double> train_labels = labels_as_double(labels, train_idx);
  const std::vector<int> val_labels = gather(labels, val_idx);

  TrainResult result;
  result.params = params;
  result.best_val_pr_auc = -1.0;
  int since_improve = 0;

  for (int iter = 0; iter < hyper.max_iter; ++iter) {
    ad::Tape tape;
    const ad::Tensor scores = forward(tape, data, cfg, params);
    const ad::Tensor loss = tape.bce_loss(tape.select_rows(scores, train_idx), train_labels);
    const double loss_value = tape.scalar(loss);
    if (!std::isfinite(loss_value))
      throw NumericError("train: loss diverged at iteration " + std::to_string(iter));

    TrainLogEntry entry{iter, loss_value, -1.0};
    if (iter % hyper.eval_every == 0) {
      entry.val_pr_auc = pr_auc(gather(score_column(tape, scores), val_idx), val_labels);
      if (entry.val_pr_auc > result.best_val_pr_auc) {
        result.best_val_pr_auc = entry.val_pr_auc;
        result.params = params;  // scores reflect the pre-update state
        result.stop_iter = iter;
        since_improve = 0;
      } else if (++since_improve >= hyper.patience) {
        result.log.push_back(entry);
        break;
      }
    }
    result.log.push_back(entry);
    tape.backward(loss);
    adam.step(params, tape);
  }
  return result;
}

ParamStore fit_fixed(const ModelConfig& cfg, const Dataset& data, const std::vector<int>& labels,
                     const std::vector<int>& train_idx, int iters, const Hyper& hyper,
                     uint64_t seed, std::vector<TrainLogEntry>* log) {
  if (train_idx.empty()) throw ValidationError("fit_fixed: empty train set");
  const HeteroSchema& schema = schema_of(data, cfg);
  ParamStore params = init_params(schema, cfg, seed);
  Adam adam(params, {hyper.lr, 0.9, 0.999, 1e-8, hyper.l2});
  const std::vector<double> train_labels = labels_as_double(labels, train_idx);
  for (int iter = 0; iter < iters; ++iter) {
    ad::Tape tape;
    const ad::Tensor scores = forward(tape, data, cfg, params);
    const ad::Tensor loss = tape.bce_loss(tape.select_rows(scores, train_idx), train_labels);
    const double loss_value = tape.scalar(loss);
    if (!std::isfinite(loss_value))
      throw NumericError("fit_fixed: loss diverged at iteration " + std::to_string(iter));
    if (log) log->push_back({iter, loss_value, -1.0});
    tape.backward(loss);
    adam.step(params, tape);
  }
  return params;
}

std::vector<double> predict(const Dataset& data, const ModelConfig& cfg,
                            const ParamStore& params) {
  ad::Tape tape;
  const ad::Tensor scores = forward(tape, data, cfg, params);
  return score_column(tape, scores);
}

std::string cv_csv_header() { return "model,layers,lr,l2,fold,val_pr_auc,stop_iter"; }

std::string cv_csv_line(const CvRow& row) {
  return row.model + ',' + std::to_string(row.layers) + ',' + format_double(row.lr) + ',' +
         format_double(row.l2) + ',' + std::to_string(row.fold) + ',' +
         format_double(row.val_pr_auc) + ',' + std::to_string(row.stop_iter);
}

GridResult grid_search(const ModelConfig& cfg, const Dataset& data,
                       const std::vector<int>& labels, const std::vector<int>& train_idx,
                       const HyperGrid& grid, int k_folds, uint64_t seed, int jobs) {
  if (grid.lrs.empty() || grid.l2s.empty())
    throw ValidationError("grid_search: empty hyperparameter grid");

  // Fold the training subset, then lift fold positions back to node indices.
  const std::vector<int> train_labels = gather(labels, train_idx);
  const std::vector<SplitSpec> local_folds = kfold_stratified(train_labels, k_folds, seed);
  struct Fold {
    std::vector<int> train, val;
  };
  std::vector<Fold> folds(local_folds.size());
  for (size_t f = 0; f < local_folds.size(); ++f) {
    for (int p : local_folds[f].train) folds[f].train.push_back(train_idx[p]);
    for (int p : local_folds[f].test) folds[f].val.push_back(train_idx[p]);
  }

  const int n_lr = static_cast<int>(grid.lrs.size());
  const int n_l2 = static_cast<int>(grid.l2s.size());
  const int n_points = n_lr * n_l2;
  const int n_tasks = n_points * k_folds;
  std::vector<CvRow> table(n_tasks);

  run_tasks(n_tasks, jobs, [&](int t) {
    const int point = t / k_folds;
    const int fold = t % k_folds;
    Hyper hyper;
    hyper.lr = grid.lrs[point / n_l2];
    hyper.l2 = grid.l2s[point % n_l2];
    hyper.max_iter = grid.max_iter;
    hyper.eval_every = grid.eval_every;
    hyper.patience = grid.patience;
    const TrainResult r =
        train(cfg, data, labels, folds[fold].train, folds[fold].val, hyper, seed);
    table[t] = {to_string(cfg.kind), cfg.layers,  hyper.lr,   hyper.l2,
                fold,                r.best_val_pr_auc, r.stop_iter};
  });

  GridResult out;
  out.table = table;
  double best_mean = -1.0;
  int best_point = 0;
  for (int p = 0; p < n_points; ++p) {
    double mean = 0.0;
    for (int f = 0; f < k_folds; ++f) mean += table[p * k_folds + f].val_pr_auc;
    mean /= k_folds;
    const double lr = grid.lrs[p / n_l2], l2 = grid.l2s[p % n_l2];
    const double blr = grid.lrs[best_point / n_l2], bl2 = grid.l2s[best_point % n_l2];
    const bool better =
        mean > best_mean ||
        (mean == best_mean && (l2 < bl2 || (l2 == bl2 && lr < blr)));
    if (p == 0 || better) {
      best_mean = mean;
      best_point = p;
    }
  }
  out.best.lr = grid.lrs[best_point / n_l2];
  out.best.l2 = grid.l2s[best_point % n_l2];
  out.best.max_iter = grid.max_iter;
  out.best.eval_every = grid.eval_every;
  out.best.patience = grid.patience;
  out.best_mean_val_pr_auc = best_mean;

  std::vector<int> stops;
  for (int f = 0; f < k_folds; ++f) stops.push_back(table[best_point * k_folds + f].stop_iter);
  std::sort(stops.begin(), stops.end());
  out.median_stop_iter = stops[(stops.size() - 1) / 2];
  return out;
}

}  // namespace hmpnn
