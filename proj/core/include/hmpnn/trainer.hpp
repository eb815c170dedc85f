#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpnn/model.hpp"
#include "hmpnn/split.hpp"

namespace hmpnn {

struct Hyper {
  double lr = 1e-2;
  double l2 = 0.0;
  int max_iter = 2000;
  int eval_every = 10;
  int patience = 10;  // evaluations without improvement before stopping
};

struct HyperGrid {
  std::vector<double> lrs = {1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> l2s = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  int max_iter = 2000;
  int eval_every = 10;
  int patience = 10;
};

struct TrainLogEntry {
  int iter = 0;
  double train_loss = 0.0;
  double val_pr_auc = -1.0;  // -1 on iterations without an evaluation
};

struct TrainResult {
  ParamStore params;  // snapshot with the best validation PR AUC
  std::vector<TrainLogEntry> log;
  int stop_iter = 0;  // optimizer steps taken before the snapshot
  double best_val_pr_auc = 0.0;
};

// Full-batch Adam on the train indices with the loss masked to them;
// validation PR AUC every eval_every steps decides early stopping. Iteration
// t is evaluated before its update, so stop_iter counts completed steps.
// Throws NumericError on a non-finite loss.
TrainResult train(const ModelConfig& cfg, const Dataset& data, const std::vector<int>& labels,
                  const std::vector<int>& train_idx, const std::vector<int>& val_idx,
                  const Hyper& hyper, uint64_t seed);

// Exactly `iters` Adam steps on the given indices, no evaluation. iters = 0
// returns the seeded initialization. The log, when requested, records the
// pre-update loss of every iteration.
ParamStore fit_fixed(const ModelConfig& cfg, const Dataset& data, const std::vector<int>& labels,
                     const std::vector<int>& train_idx, int iters, const Hyper& hyper,
                     uint64_t seed, std::vector<TrainLogEntry>* log = nullptr);

// Scores for every labeled-type node under the given parameters.
std::vector<double> predict(const Dataset& data, const ModelConfig& cfg, const ParamStore& params);

// One cv_table.csv row.
struct CvRow {
  std::string model;
  int layers = 0;
  double lr = 0.0;
  double l2 = 0.0;
  int fold = 0;
  double val_pr_auc = 0.0;
  int stop_iter = 0;
};

std::string cv_csv_header();
std::string cv_csv_line(const CvRow& row);

struct GridResult {
  Hyper best;                // winning lr and l2, grid iteration settings
  int median_stop_iter = 0;  // lower median across the winner's folds
  double best_mean_val_pr_auc = 0.0;
  std::vector<CvRow> table;  // lr-major, l2 next, fold innermost
};

// K-fold CV over the train indices for every (lr, l2) point. Winner has the
// best mean validation PR AUC; ties go to the smaller l2, then smaller lr.
// Runs fan out over `jobs` threads; the table order is fixed by grid order.
GridResult grid_search(const ModelConfig& cfg, const Dataset& data,
                       const std::vector<int>& labels, const std::vector<int>& train_idx,
                       const HyperGrid& grid, int k_folds, uint64_t seed, int jobs);

std::vector<double> gather(const std::vector<double>& values, const std::vector<int>& idx);
std::vector<int> gather(const std::vector<int>& values, const std::vector<int>& idx);

}  // namespace hmpnn
