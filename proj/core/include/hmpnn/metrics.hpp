#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hmpnn {

// Rank metrics for binary scores. Labels are 0/1; every function throws
// ValidationError when the required classes are missing.

// Mann-Whitney statistic: P(score_pos > score_neg) + 0.5 P(tie), computed
// with midranks. Needs both classes.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Average precision: mean over positives, taken in descending score order
// with ties kept in index order, of precision at that rank. Needs at least
// one positive.
double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct PrecisionLift {
  double precision = 0.0;
  double lift = 0.0;
  int prefix_len = 0;
};

// Shortest descending-score prefix (stable by index) reaching the recall
// level, with precision over that prefix and lift = precision / prevalence.
// recall_pct lies in (0, 100].
PrecisionLift precision_at_recall(const std::vector<double>& scores,
                                  const std::vector<int>& labels, double recall_pct);

inline constexpr std::array<double, 4> kRecallLevels = {1.0, 5.0, 10.0, 50.0};

// One metrics.csv row: a model variant evaluated on one seed's test split.
struct MetricsRow {
  std::string model;
  int layers = 0;
  uint64_t seed = 0;
  double pr = 0.0;
  double roc = 0.0;
  std::array<double, 4> prec{};  // at kRecallLevels
  std::array<double, 4> lift{};
};

MetricsRow compute_metrics_row(const std::string& model, int layers, uint64_t seed,
                               const std::vector<double>& scores, const std::vector<int>& labels);

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);
// Parses a full metrics.csv (header required). Used by the report renderer.
std::vector<MetricsRow> parse_metrics_csv(const std::string& text, const std::string& origin);

// Renders rows as a text table: one block per model kind, one line per layer
// count, metrics averaged over seeds.
std::string render_report(const std::vector<MetricsRow>& rows);

}  // namespace hmpnn
