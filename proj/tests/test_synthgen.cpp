#include <doctest.h>

#include <numeric>
#include <string>
#include <vector>

#include "hmpnn/errors.hpp"
#include "hmpnn/graph.hpp"
#include "hmpnn/schema.hpp"
#include "hmpnn/synthgen.hpp"

using namespace hmpnn;

namespace {

GenConfig small_gen() {
  GenConfig cfg;
  cfg.n_individual = 2000;
  cfg.n_organization = 200;
  cfg.n_external = 120;
  cfg.prevalence = 0.05;
  return cfg;
}

bool graphs_equal(const HeteroGraph& a, const HeteroGraph& b) {
  if (a.labels != b.labels) return false;
  for (size_t t = 0; t < a.node_features.size(); ++t)
    if (a.node_features[t].data != b.node_features[t].data) return false;
  for (size_t si = 0; si < a.schema.meta_steps.size(); ++si) {
    const EdgeSet& ea = a.edges(static_cast<int>(si));
    const EdgeSet& eb = b.edges(static_cast<int>(si));
    if (ea.src != eb.src || ea.dst != eb.dst || ea.features.data != eb.features.data)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  GenConfig cfg = small_gen();
  cfg.n_individual = 400;
  cfg.n_organization = 40;
  cfg.n_external = 20;
  HeteroGraph a = generate(cfg, 42);
  HeteroGraph b = generate(cfg, 42);
  CHECK(graphs_equal(a, b));
  HeteroGraph c = generate(cfg, 43);
  CHECK(!graphs_equal(a, c));
}

TEST_CASE("labels land on individuals at the configured prevalence") {
  GenConfig cfg = small_gen();
  GenReport rep;
  HeteroGraph g = generate(cfg, 7, &rep);

  CHECK(g.schema.hash() == aml_schema().hash());
  CHECK(g.node_count(aml::kIndividual) == cfg.n_individual);
  CHECK(g.node_count(aml::kOrganization) == cfg.n_organization);
  CHECK(g.node_count(aml::kExternal) == cfg.n_external);

  const std::vector<int>& labels = g.labels[aml::kIndividual];
  REQUIRE(static_cast<int>(labels.size()) == cfg.n_individual);
  const int n_pos = std::accumulate(labels.begin(), labels.end(), 0);
  CHECK(n_pos == 100);  // round(0.05 * 2000)
  CHECK(rep.n_positive == n_pos);
  CHECK(g.labels[aml::kOrganization].empty());
  CHECK(g.labels[aml::kExternal].empty());

  CHECK(rep.n_smurf + rep.n_cycle + rep.n_role_abuse == rep.n_positive);
  CHECK(rep.n_cycle % 3 == 0);  // rings of three
  CHECK(rep.n_smurf > 0);
  CHECK(rep.n_cycle > 0);
  CHECK(rep.n_role_abuse > 0);
}

TEST_CASE("every individual draws a salary from some organization") {
  HeteroGraph g = generate(small_gen(), 3);
  const int oi = g.schema.step_index({aml::kOrganization, aml::kTxn, aml::kIndividual});
  const EdgeSet& es = g.edges(oi);
  std::vector<int> paid(g.node_count(aml::kIndividual), 0);
  for (int e = 0; e < es.size(); ++e) {
    paid[es.dst[e]] = 1;
    CHECK(es.features.at(e, aml::kTxnAmount) > 0.0);
  }
  CHECK(std::accumulate(paid.begin(), paid.end(), 0) == g.node_count(aml::kIndividual));
}

TEST_CASE("flagged individuals carry the intrinsic shift and heavier inflows") {
  GenConfig cfg = small_gen();
  GenReport rep;
  HeteroGraph g = generate(cfg, 19, &rep);
  const std::vector<int>& labels = g.labels[aml::kIndividual];
  const DenseMatrix& feats = g.node_features[aml::kIndividual];

  double f0_pos = 0, f0_neg = 0, f1_pos = 0, f1_neg = 0;
  int np = 0, nn = 0;
  for (int v = 0; v < feats.rows; ++v) {
    if (labels[v]) {
      f0_pos += feats.at(v, 0);
      f1_pos += feats.at(v, 1);
      ++np;
    } else {
      f0_neg += feats.at(v, 0);
      f1_neg += feats.at(v, 1);
      ++nn;
    }
  }
  REQUIRE(np > 0);
  // The planted shifts are +0.8 and -0.5 on top of unit-variance noise; with
  // 100 positives the sample means sit well inside half the shift.
  CHECK(f0_pos / np - f0_neg / nn > 0.4);
  CHECK(f1_pos / np - f1_neg / nn < -0.25);

  CHECK(rep.mean_in_degree_pos > rep.mean_in_degree_neg);
  CHECK(rep.mean_in_amount_pos > rep.mean_in_amount_neg);
}

TEST_CASE("report histogram buckets cover every node once") {
  GenConfig cfg = small_gen();
  GenReport rep;
  HeteroGraph g = generate(cfg, 11, &rep);

  REQUIRE(rep.degree_histogram.size() == 3);
  const int counts[3] = {cfg.n_individual, cfg.n_organization, cfg.n_external};
  for (int t = 0; t < 3; ++t) {
    REQUIRE(rep.degree_histogram[t].size() == 13);
    long total = 0;
    for (long c : rep.degree_histogram[t]) {
      CHECK(c >= 0);
      total += c;
    }
    CHECK(total == counts[t]);
  }
  // Salaries alone give every individual degree >= 1, so bucket zero
  // (degree 0) stays empty for them.
  CHECK(rep.degree_histogram[aml::kIndividual][0] == 0);

  const std::string text = rep.to_text(g.schema);
  CHECK(text.find("positives: 100") != std::string::npos);
  CHECK(text.find("smurf") != std::string::npos);
  CHECK(text.find("individual txn degree histogram") != std::string::npos);
  CHECK(text.find("external txn degree histogram") != std::string::npos);
}

TEST_CASE("zero prevalence produces an all-clean graph") {
  GenConfig cfg;
  cfg.n_individual = 60;
  cfg.n_organization = 6;
  cfg.n_external = 4;
  cfg.prevalence = 0.0;
  GenReport rep;
  HeteroGraph g = generate(cfg, 1, &rep);
  const std::vector<int>& labels = g.labels[aml::kIndividual];
  CHECK(std::accumulate(labels.begin(), labels.end(), 0) == 0);
  CHECK(rep.n_positive == 0);
  CHECK(g.total_edges() > 0);
}

TEST_CASE("generator config validation") {
  GenConfig cfg;

  GenConfig bad = cfg;
  bad.n_individual = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cfg;
  bad.prevalence = 0.6;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.prevalence = -0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cfg;
  bad.p2p_rate = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cfg;
  bad.merchant_fraction = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cfg;
  bad.smurf_weight = -0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cfg;
  bad.smurf_weight = 0.0;
  bad.cycle_weight = 0.0;
  bad.role_abuse_weight = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("motif weight"), ValidationError);

  // Motifs need room: five positives out of ten individuals is infeasible.
  bad = cfg;
  bad.n_individual = 10;
  bad.n_organization = 2;
  bad.n_external = 3;
  bad.prevalence = 0.5;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("infeasible"), ValidationError);

  // The same counts with nothing planted are fine.
  bad.prevalence = 0.0;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("motif weights steer the scheme mix") {
  GenConfig cfg = small_gen();
  cfg.smurf_weight = 1.0;
  cfg.cycle_weight = 0.0;
  cfg.role_abuse_weight = 0.0;
  GenReport rep;
  generate(cfg, 2, &rep);
  CHECK(rep.n_smurf == rep.n_positive);
  CHECK(rep.n_cycle == 0);
  CHECK(rep.n_role_abuse == 0);

  cfg.smurf_weight = 0.0;
  cfg.cycle_weight = 1.0;
  GenReport rep2;
  generate(cfg, 2, &rep2);
  // Cycles consume groups of three, so up to two positives spill over to
  // the other schemes even at full cycle weight.
  CHECK(rep2.n_cycle >= rep2.n_positive - 2);
  CHECK(rep2.n_smurf + rep2.n_role_abuse <= 2);
}
