#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hmpnn/errors.hpp"
#include "hmpnn/metrics.hpp"
#include "hmpnn/rng.hpp"

using namespace hmpnn;

namespace {

// Pairwise Mann-Whitney probability, quadratic on purpose.
double roc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  long pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      ++pairs;
      if (s[i] > s[j])
        wins += 1.0;
      else if (s[i] == s[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

std::vector<int> rank_order(const std::vector<double>& s) {
  std::vector<int> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s[a] > s[b]; });
  return order;
}

// Average precision by walking the ranking and averaging precision at every
// positive hit.
double ap_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  const std::vector<int> order = rank_order(s);
  double sum = 0;
  int tp = 0, pos = 0;
  for (size_t r = 0; r < order.size(); ++r) {
    if (y[order[r]]) {
      ++tp;
      sum += static_cast<double>(tp) / static_cast<double>(r + 1);
    }
  }
  for (int v : y) pos += v;
  return sum / pos;
}

PrecisionLift par_oracle(const std::vector<double>& s, const std::vector<int>& y, double pct) {
  const std::vector<int> order = rank_order(s);
  int pos = 0;
  for (int v : y) pos += v;
  int tp = 0;
  for (size_t r = 0; r < order.size(); ++r) {
    tp += y[order[r]];
    if (tp * 100.0 >= pct * pos) {
      PrecisionLift out;
      out.prefix_len = static_cast<int>(r + 1);
      out.precision = static_cast<double>(tp) / out.prefix_len;
      out.lift = out.precision * static_cast<double>(s.size()) / pos;
      return out;
    }
  }
  return {};
}

// Random instance with heavy score ties and both classes present.
void random_instance(Rng& rng, std::vector<double>& s, std::vector<int>& y) {
  const int n = 10 + static_cast<int>(rng.pick(491));
  s.resize(n);
  y.resize(n);
  while (true) {
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.pick(12)) / 4.0;
      y[i] = rng.uniform() < 0.3 ? 1 : 0;
      pos += y[i];
    }
    if (pos > 0 && pos < n) return;
  }
}

}  // namespace

TEST_CASE("roc_auc matches the pairwise oracle on tied random instances") {
  Rng rng(505);
  std::vector<double> s;
  std::vector<int> y;
  for (int it = 0; it < 60; ++it) {
    random_instance(rng, s, y);
    CHECK(std::fabs(roc_auc(s, y) - roc_oracle(s, y)) < 1e-12);
  }
}

TEST_CASE("pr_auc matches the rank-walk oracle on tied random instances") {
  Rng rng(606);
  std::vector<double> s;
  std::vector<int> y;
  for (int it = 0; it < 60; ++it) {
    random_instance(rng, s, y);
    CHECK(std::fabs(pr_auc(s, y) - ap_oracle(s, y)) < 1e-12);
  }
}

TEST_CASE("precision_at_recall matches the prefix-walk oracle") {
  Rng rng(707);
  std::vector<double> s;
  std::vector<int> y;
  for (int it = 0; it < 60; ++it) {
    random_instance(rng, s, y);
    for (double pct : kRecallLevels) {
      const PrecisionLift got = precision_at_recall(s, y, pct);
      const PrecisionLift want = par_oracle(s, y, pct);
      CHECK(got.prefix_len == want.prefix_len);
      CHECK(std::fabs(got.precision - want.precision) < 1e-12);
      CHECK(std::fabs(got.lift - want.lift) < 1e-12);
    }
  }
}

TEST_CASE("four-point anchor values") {
  const std::vector<double> s = {0.9, 0.8, 0.4, 0.3};
  const std::vector<int> y = {1, 0, 1, 0};

  CHECK(roc_auc(s, y) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(pr_auc(s, y) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));

  const PrecisionLift half = precision_at_recall(s, y, 50.0);
  CHECK(half.precision == 1.0);
  CHECK(half.prefix_len == 1);
  CHECK(half.lift == doctest::Approx(2.0).epsilon(1e-15));

  const PrecisionLift full = precision_at_recall(s, y, 100.0);
  CHECK(full.prefix_len == 3);
  CHECK(full.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(full.lift == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("degenerate rankings") {
  const std::vector<int> y = {1, 0, 1, 0, 0};

  CHECK(roc_auc({2, 2, 2, 2, 2}, y) == 0.5);
  CHECK(roc_auc({5, 1, 4, 2, 3}, y) == 1.0);
  CHECK(roc_auc({1, 5, 2, 4, 3}, y) == 0.0);

  // A perfect ranking walks precision 1 at every positive.
  CHECK(pr_auc({5, 1, 4, 2, 3}, y) == 1.0);
  // Every element positive keeps precision at 1 throughout.
  CHECK(pr_auc({3, 1, 2}, {1, 1, 1}) == 1.0);
}

TEST_CASE("rank metrics are invariant under strictly increasing transforms") {
  Rng rng(808);
  std::vector<double> s;
  std::vector<int> y;
  random_instance(rng, s, y);
  std::vector<double> t(s.size());
  for (size_t i = 0; i < s.size(); ++i) t[i] = 3.0 * s[i] - 7.0;

  CHECK(roc_auc(s, y) == roc_auc(t, y));
  CHECK(pr_auc(s, y) == pr_auc(t, y));
  const PrecisionLift a = precision_at_recall(s, y, 10.0);
  const PrecisionLift b = precision_at_recall(t, y, 10.0);
  CHECK(a.precision == b.precision);
  CHECK(a.prefix_len == b.prefix_len);
}

TEST_CASE("metric input validation") {
  CHECK_THROWS_AS(roc_auc({}, {}), ValidationError);
  CHECK_THROWS_AS(roc_auc({1.0, 2.0}, {1}), ValidationError);
  CHECK_THROWS_AS(roc_auc({1.0, 2.0}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(roc_auc({1.0, 2.0}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(roc_auc({1.0, 2.0}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(pr_auc({1.0, 2.0}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(precision_at_recall({1.0, 2.0}, {0, 0}, 50.0), ValidationError);
  CHECK_THROWS_AS(precision_at_recall({1.0, 2.0}, {0, 1}, 0.0), ValidationError);
  CHECK_THROWS_AS(precision_at_recall({1.0, 2.0}, {0, 1}, 100.5), ValidationError);
  CHECK_THROWS_AS(precision_at_recall({1.0, 2.0}, {0, 1}, -5.0), ValidationError);
}

TEST_CASE("metrics rows survive the csv round trip exactly") {
  Rng rng(909);
  std::vector<double> s;
  std::vector<int> y;
  random_instance(rng, s, y);
  const MetricsRow row = compute_metrics_row("hmpnn-ct", 3, 17, s, y);
  CHECK(row.pr == pr_auc(s, y));
  CHECK(row.roc == roc_auc(s, y));
  CHECK(row.prec[3] == precision_at_recall(s, y, 50.0).precision);
  CHECK(row.lift[0] == precision_at_recall(s, y, 1.0).lift);

  const std::string text = metrics_csv_header() + "\n" + metrics_csv_line(row) + "\n";
  const std::vector<MetricsRow> back = parse_metrics_csv(text, "mem");
  REQUIRE(back.size() == 1);
  CHECK(back[0].model == "hmpnn-ct");
  CHECK(back[0].layers == 3);
  CHECK(back[0].seed == 17);
  CHECK(back[0].pr == row.pr);
  CHECK(back[0].roc == row.roc);
  for (int i = 0; i < 4; ++i) {
    CHECK(back[0].prec[i] == row.prec[i]);
    CHECK(back[0].lift[i] == row.lift[i]);
  }
}

TEST_CASE("metrics csv parser rejects malformed input") {
  CHECK_THROWS_WITH_AS(parse_metrics_csv("", "x"), doctest::Contains("empty"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_metrics_csv("model,layers\n", "x"),
                       doctest::Contains("unexpected metrics header"), ValidationError);
  const std::string head = metrics_csv_header() + "\n";
  CHECK_THROWS_WITH_AS(parse_metrics_csv(head + "m,1,2,0.5\n", "x"),
                       doctest::Contains("expected 13 cells"), ValidationError);
  CHECK_THROWS_AS(
      parse_metrics_csv(head + "m,1,2,zap,0,0,0,0,0,0,0,0,0\n", "x"), ValidationError);
  // Blank lines and a trailing newline are fine.
  const std::string ok = head + "\nm,1,2,0.5,0.5,1,1,1,1,2,2,2,2\n\n";
  CHECK(parse_metrics_csv(ok, "x").size() == 1);
}

TEST_CASE("report averages seeds and orders model blocks") {
  auto row = [](const std::string& m, int layers, uint64_t seed, double pr) {
    MetricsRow r;
    r.model = m;
    r.layers = layers;
    r.seed = seed;
    r.pr = pr;
    r.roc = 0.9;
    return r;
  };
  std::vector<MetricsRow> rows = {
      row("hmpnn-ct", 3, 0, 0.4), row("hmpnn-ct", 3, 1, 0.6), row("hmpnn-ct", 1, 0, 0.3),
      row("logreg", 1, 0, 0.2),   row("hgraphsage", 3, 0, 0.5),
  };
  const std::string text = render_report(rows);

  CHECK(text.find("pr_auc") != std::string::npos);
  CHECK(text.find("0.500") != std::string::npos);  // ct-3 averaged over two seeds

  const size_t p_logreg = text.find("logreg");
  const size_t p_sage = text.find("hgraphsage");
  const size_t p_ct = text.find("hmpnn-ct");
  REQUIRE(p_logreg != std::string::npos);
  REQUIRE(p_sage != std::string::npos);
  REQUIRE(p_ct != std::string::npos);
  CHECK(p_logreg < p_sage);
  CHECK(p_sage < p_ct);

  // Within hmpnn-ct the one-layer line precedes the three-layer line, and
  // the seeds column distinguishes them.
  const size_t p_ct2 = text.find("hmpnn-ct", p_ct + 1);
  REQUIRE(p_ct2 != std::string::npos);
  const std::string line1 = text.substr(p_ct, text.find('\n', p_ct) - p_ct);
  const std::string line2 = text.substr(p_ct2, text.find('\n', p_ct2) - p_ct2);
  CHECK(line1.find(" 1 ") != std::string::npos);
  CHECK(line2.find(" 3 ") != std::string::npos);
  CHECK(line1.find("0.300") != std::string::npos);
  CHECK(line2.find("0.500") != std::string::npos);
}
