#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmpnn/graph.hpp"

namespace hmpnn {

// Synthetic transaction network. Background traffic gives every individual a
// salary deposit plus assorted spending, person-to-person and cross-border
// flows; merchant and forwarder roles make heavy in-degrees and conserved
// pass-through flows common among negatives, so positives are not separable
// by degree alone. The flagged individuals participate in one of three
// planted schemes whose footprint lives mostly in edge amounts and multi-hop
// structure:
//   smurf: many small deposits, one outgoing transfer near their sum, the
//          depositors themselves fed by a shared external;
//   cycle: money moved around a ring of individuals through externals with
//          amounts conserved at every hop;
//   role abuse: near-total owner of an organization that collects funds and
//          pays them out to the owner.
struct GenConfig {
  int n_individual = 20000;
  int n_organization = 2000;
  int n_external = 1200;
  double prevalence = 0.005;

  // Background rates, per individual unless noted.
  double spending_rate = 0.8;
  double p2p_rate = 0.5;
  double ext_out_rate = 0.2;
  double ext_in_rate = 0.2;
  double org_org_rate = 0.5;  // per organization
  double org_ext_rate = 0.3;  // per organization, each direction
  double merchant_fraction = 0.05;
  double forwarder_fraction = 0.03;

  // Relative motif frequencies, normalized internally.
  double smurf_weight = 0.45;
  double cycle_weight = 0.35;
  double role_abuse_weight = 0.20;

  // Throws ValidationError on nonsensical values or when motifs need more
  // nodes than the configured counts provide.
  void validate() const;
};

struct GenReport {
  int n_positive = 0;
  int n_smurf = 0;
  int n_cycle = 0;
  int n_role_abuse = 0;
  double mean_in_degree_pos = 0.0;
  double mean_in_degree_neg = 0.0;
  double mean_in_amount_pos = 0.0;
  double mean_in_amount_neg = 0.0;
  // Per node type, log2-bucketed histogram of total txn degree.
  std::vector<std::vector<long>> degree_histogram;

  std::string to_text(const HeteroSchema& schema) const;
};

HeteroGraph generate(const GenConfig& cfg, uint64_t seed, GenReport* report = nullptr);

}  // namespace hmpnn
