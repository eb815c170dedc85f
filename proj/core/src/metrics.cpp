#include "hmpnn/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "hmpnn/errors.hpp"
#include "hmpnn/files.hpp"

namespace hmpnn {

namespace {

long check_and_count_positives(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw ValidationError("metrics: scores and labels differ in length");
  if (scores.empty()) throw ValidationError("metrics: empty input");
  long pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("metrics: labels must be 0 or 1");
    pos += y;
  }
  return pos;
}

// Descending by score, ties in original index order.
std::vector<int> descending_order(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const long n = static_cast<long>(scores.size());
  const long pos = check_and_count_positives(scores, labels);
  const long neg = n - pos;
  if (pos == 0 || neg == 0) throw ValidationError("roc_auc: needs both classes");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] < scores[b]; });

  // Midrank sum of the positives gives the Mann-Whitney statistic.
  double rank_sum = 0.0;
  long i = 0;
  while (i < n) {
    long j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (long t = i; t < j; ++t)
      if (labels[order[t]]) rank_sum += midrank;
    i = j;
  }
  return (rank_sum - 0.5 * static_cast<double>(pos) * (pos + 1)) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const long pos = check_and_count_positives(scores, labels);
  if (pos == 0) throw ValidationError("pr_auc: needs at least one positive");
  const std::vector<int> order = descending_order(scores);
  double sum = 0.0;
  long tp = 0;
  for (size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]]) {
      ++tp;
      sum += static_cast<double>(tp) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(pos);
}

PrecisionLift precision_at_recall(const std::vector<double>& scores,
                                  const std::vector<int>& labels, double recall_pct) {
  const long n = static_cast<long>(scores.size());
  const long pos = check_and_count_positives(scores, labels);
  if (pos == 0) throw ValidationError("precision_at_recall: needs at least one positive");
  if (!(recall_pct > 0.0 && recall_pct <= 100.0))
    throw ValidationError("precision_at_recall: recall level must lie in (0, 100]");

  const std::vector<int> order = descending_order(scores);
  long tp = 0;
  for (long r = 0; r < n; ++r) {
    tp += labels[order[r]];
    // recall >= pct/100, compared without forming either quotient
    if (static_cast<double>(tp) * 100.0 >= recall_pct * static_cast<double>(pos)) {
      PrecisionLift out;
      out.prefix_len = static_cast<int>(r + 1);
      out.precision = static_cast<double>(tp) / static_cast<double>(r + 1);
      out.lift = out.precision * static_cast<double>(n) / static_cast<double>(pos);
      return out;
    }
  }
  throw NumericError("precision_at_recall: prefix walk never reached the recall level");
}

MetricsRow compute_metrics_row(const std::string& model, int layers, uint64_t seed,
                               const std::vector<double>& scores, const std::vector<int>& labels) {
  MetricsRow row;
  row.model = model;
  row.layers = layers;
  row.seed = seed;
  row.pr = pr_auc(scores, labels);
  row.roc = roc_auc(scores, labels);
  for (size_t i = 0; i < kRecallLevels.size(); ++i) {
    const PrecisionLift pl = precision_at_recall(scores, labels, kRecallLevels[i]);
    row.prec[i] = pl.precision;
    row.lift[i] = pl.lift;
  }
  return row;
}

std::string metrics_csv_header() {
  return "model,layers,seed,pr_auc,roc_auc,prec_at_1,prec_at_5,prec_at_10,prec_at_50,"
         "lift_at_1,lift_at_5,lift_at_10,lift_at_50";
}

std::string metrics_csv_line(const MetricsRow& row) {
  std::string line = row.model + ',' + std::to_string(row.layers) + ',' + std::to_string(row.seed);
  line += ',' + format_double(row.pr) + ',' + format_double(row.roc);
  for (double p : row.prec) line += ',' + format_double(p);
  for (double l : row.lift) line += ',' + format_double(l);
  return line;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  std::vector<MetricsRow> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != metrics_csv_header())
        throw ValidationError(origin + ": unexpected metrics header '" + line + "'");
      saw_header = true;
      continue;
    }
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 13)
      throw ValidationError(origin + " line " + std::to_string(lineno) + ": expected 13 cells, got " +
                            std::to_string(cells.size()));
    const std::string ctx = origin + " line " + std::to_string(lineno);
    MetricsRow row;
    row.model = cells[0];
    row.layers = static_cast<int>(parse_long(cells[1], ctx));
    row.seed = static_cast<uint64_t>(parse_long(cells[2], ctx));
    row.pr = parse_double(cells[3], ctx);
    row.roc = parse_double(cells[4], ctx);
    for (int i = 0; i < 4; ++i) row.prec[i] = parse_double(cells[5 + i], ctx);
    for (int i = 0; i < 4; ++i) row.lift[i] = parse_double(cells[9 + i], ctx);
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw ValidationError(origin + ": empty metrics file");
  return rows;
}

}  // namespace hmpnn
