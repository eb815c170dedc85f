#include "hmpnn/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "hmpnn/rng.hpp"

namespace hmpnn {

void GenConfig::validate() const {
  if (n_individual < 1 || n_organization < 1 || n_external < 1)
    throw ValidationError("generator config: node counts must be positive");
  if (prevalence < 0.0 || prevalence > 0.5)
    throw ValidationError("generator config: prevalence must lie in [0, 0.5]");
  for (double r : {spending_rate, p2p_rate, ext_out_rate, ext_in_rate, org_org_rate,
                   org_ext_rate, merchant_fraction, forwarder_fraction})
    if (r < 0.0) throw ValidationError("generator config: rates must be nonnegative");
  if (merchant_fraction > 1.0 || forwarder_fraction > 1.0)
    throw ValidationError("generator config: fractions must be <= 1");
  if (smurf_weight < 0.0 || cycle_weight < 0.0 || role_abuse_weight < 0.0)
    throw ValidationError("generator config: motif weights must be nonnegative");
  const long n_pos = std::lround(prevalence * n_individual);
  if (n_pos > 0) {
    if (smurf_weight + cycle_weight + role_abuse_weight <= 0.0)
      throw ValidationError("generator config: positive prevalence needs a positive motif weight");
    // Smurfs draw on the individual pool for depositors, cycles need three
    // distinct externals, role abuse needs an organization per case.
    if (n_individual < 25 || n_external < 3 || n_organization < 2)
      throw ValidationError(
          "generator config: infeasible, motifs need at least 25 individuals, "
          "3 externals and 2 organizations");
  }
}

namespace {

struct EdgeBuilder {
  std::vector<int> src, dst;
  std::vector<double> f0, f1;

  void push(int s, int d, double a, double b) {
    src.push_back(s);
    dst.push_back(d);
    f0.push_back(a);
    f1.push_back(b);
  }

  EdgeTable table(const MetaStep& step) {
    EdgeTable t;
    t.step = step;
    t.src = std::move(src);
    t.dst = std::move(dst);
    const int m = static_cast<int>(t.src.size());
    t.features = DenseMatrix(m, 2);
    for (int e = 0; e < m; ++e) {
      t.features.at(e, 0) = f0[e];
      t.features.at(e, 1) = f1[e];
    }
    return t;
  }
};

int other_than(Rng& rng, int n, int avoid) {
  int x = rng.pick(n);
  while (x == avoid) x = rng.pick(n);
  return x;
}

}  // namespace

std::string GenReport::to_text(const HeteroSchema& schema) const {
  std::string out;
  out += "positives: " + std::to_string(n_positive) + " (smurf " + std::to_string(n_smurf) +
         ", cycle " + std::to_string(n_cycle) + ", role abuse " + std::to_string(n_role_abuse) +
         ")\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "individual txn in-degree mean: flagged %.2f, clean %.2f\n"
                "individual txn in-amount mean: flagged %.2f, clean %.2f\n",
                mean_in_degree_pos, mean_in_degree_neg, mean_in_amount_pos, mean_in_amount_neg);
  out += buf;
  for (size_t t = 0; t < degree_histogram.size(); ++t) {
    out += schema.node_types[t].name + " txn degree histogram (log2 buckets):";
    for (long c : degree_histogram[t]) out += " " + std::to_string(c);
    out += '\n';
  }
  return out;
}

HeteroGraph generate(const GenConfig& cfg, uint64_t seed, GenReport* report) {
  cfg.validate();
  const HeteroSchema schema = aml_schema();
  Rng rng(seed);

  const int ni = cfg.n_individual, no = cfg.n_organization, nx = cfg.n_external;
  const int n_pos = static_cast<int>(std::lround(cfg.prevalence * ni));

  // Flagged individuals: random sample without replacement.
  std::vector<int> order(ni);
  for (int v = 0; v < ni; ++v) order[v] = v;
  for (int v = 0; v < n_pos; ++v) std::swap(order[v], order[v + rng.pick(ni - v)]);
  std::vector<int> labels(ni, 0);
  std::vector<int> positives(order.begin(), order.begin() + n_pos);
  for (int v : positives) labels[v] = 1;

  // Intrinsic features: standard normal noise, two mildly shifted columns
  // for flagged individuals.
  DenseMatrix find(ni, aml::kIndividualDim);
  for (double& v : find.data) v = rng.normal();
  for (int v = 0; v < ni; ++v)
    if (labels[v]) {
      find.at(v, 0) += 0.8;
      find.at(v, 1) -= 0.5;
    }
  DenseMatrix forg(no, aml::kOrganizationDim);
  for (double& v : forg.data) v = rng.normal();
  DenseMatrix fext(nx, aml::kExternalDim);
  for (double& v : fext.data) v = rng.normal();

  // Merchant and forwarder roles among clean individuals.
  std::vector<char> merchant(ni, 0), forwarder(ni, 0);
  for (int v = 0; v < ni; ++v) {
    if (labels[v]) continue;
    const double u = rng.uniform();
    if (u < cfg.merchant_fraction)
      merchant[v] = 1;
    else if (u < cfg.merchant_fraction + cfg.forwarder_fraction)
      forwarder[v] = 1;
  }

  // One builder per meta step, indexed like the schema.
  std::vector<EdgeBuilder> b(schema.meta_steps.size());
  auto step_of = [&](int s, int e, int t) { return schema.step_index({s, e, t}); };
  const int ii = step_of(aml::kIndividual, aml::kTxn, aml::kIndividual);
  const int io = step_of(aml::kIndividual, aml::kTxn, aml::kOrganization);
  const int ix = step_of(aml::kIndividual, aml::kTxn, aml::kExternal);
  const int oi = step_of(aml::kOrganization, aml::kTxn, aml::kIndividual);
  const int oo = step_of(aml::kOrganization, aml::kTxn, aml::kOrganization);
  const int ox = step_of(aml::kOrganization, aml::kTxn, aml::kExternal);
  const int xi = step_of(aml::kExternal, aml::kTxn, aml::kIndividual);
  const int xo = step_of(aml::kExternal, aml::kTxn, aml::kOrganization);
  const int ro = step_of(aml::kIndividual, aml::kRole, aml::kOrganization);

  // Salary deposits: every individual is paid by some organization, which
  // also pins a nonzero incoming amount on every individual.
  for (int v = 0; v < ni; ++v)
    b[oi].push(rng.pick(no), v, 12 + rng.poisson(2.0), rng.lognormal(1.3, 0.25));

  // Spending and person-to-person background.
  for (int v = 0; v < ni; ++v) {
    const int k = rng.poisson(cfg.spending_rate);
    for (int j = 0; j < k; ++j)
      b[io].push(v, rng.pick(no), 1 + rng.geometric(0.5), rng.lognormal(-0.5, 0.5));
  }
  const long n_p2p = std::lround(cfg.p2p_rate * ni);
  for (long e = 0; e < n_p2p && ni > 1; ++e) {
    const int s = rng.pick(ni);
    b[ii].push(s, other_than(rng, ni, s), 1 + rng.geometric(0.6), rng.lognormal(0.0, 0.6));
  }
  const long n_ix = std::lround(cfg.ext_out_rate * ni);
  for (long e = 0; e < n_ix; ++e)
    b[ix].push(rng.pick(ni), rng.pick(nx), 1 + rng.geometric(0.6), rng.lognormal(0.0, 0.8));
  // Inbound external traffic is hub heavy: half of it originates from the
  // busiest tenth of external accounts (processors, exchanges).
  const int n_hub = std::max(1, nx / 10);
  const long n_xi = std::lround(cfg.ext_in_rate * ni);
  for (long e = 0; e < n_xi; ++e) {
    const int s = rng.uniform() < 0.5 ? rng.pick(n_hub) : rng.pick(nx);
    b[xi].push(s, rng.pick(ni), 1 + rng.geometric(0.6), rng.lognormal(0.0, 0.8));
  }
  // Bonuses and refunds: a second incoming organization payment for a fair
  // share of individuals.
  const long n_bonus = std::lround(0.25 * ni);
  for (long e = 0; e < n_bonus; ++e)
    b[oi].push(rng.pick(no), rng.pick(ni), 1 + rng.geometric(0.5), rng.lognormal(0.6, 0.7));

  // Organization-level background.
  const long n_oo = std::lround(cfg.org_org_rate * no);
  for (long e = 0; e < n_oo && no > 1; ++e) {
    const int s = rng.pick(no);
    b[oo].push(s, other_than(rng, no, s), 1 + rng.geometric(0.4), rng.lognormal(0.8, 0.7));
  }
  const long n_oe = std::lround(cfg.org_ext_rate * no);
  for (long e = 0; e < n_oe; ++e)
    b[ox].push(rng.pick(no), rng.pick(nx), 1 + rng.geometric(0.4), rng.lognormal(0.8, 0.8));
  for (long e = 0; e < n_oe; ++e)
    b[xo].push(rng.pick(nx), rng.pick(no), 1 + rng.geometric(0.4), rng.lognormal(0.8, 0.8));

  // Merchants take many small payments and settle a fraction onward; this
  // plants heavy, small-amount in-degrees among the negatives.
  for (int v = 0; v < ni; ++v) {
    if (!merchant[v]) continue;
    const int k = 8 + rng.poisson(6.0);
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      const double a = rng.lognormal(-1.2, 0.4);
      total += a;
      b[ii].push(other_than(rng, ni, v), v, 1, a);
    }
    const int outs = 2 + rng.pick(2);
    for (int j = 0; j < outs; ++j)
      b[io].push(v, rng.pick(no), 1 + rng.geometric(0.4), total * 0.65 / outs);
  }

  // Forwarders pass one incoming payment almost fully onward, so conserved
  // one-in-one-out flows also occur among the negatives, including flows that
  // both enter from and leave to external accounts.
  for (int v = 0; v < ni; ++v) {
    if (!forwarder[v]) continue;
    const double a = rng.lognormal(0.5, 0.4);
    if (rng.uniform() < 0.35)
      b[xi].push(rng.pick(nx), v, 1, a);
    else
      b[ii].push(other_than(rng, ni, v), v, 1, a);
    const double out = a * rng.uniform(0.9, 1.0);
    if (rng.uniform() < 0.7)
      b[ii].push(v, other_than(rng, ni, v), 1, out);
    else
      b[ix].push(v, rng.pick(nx), 1, out);
  }

  // Ownership and officer roles.
  for (int o = 0; o < no; ++o) {
    const int k = 1 + (rng.uniform() < 0.5 ? 1 : 0);
    for (int j = 0; j < k; ++j) {
      const int code = 1 + rng.pick(3);
      const double own = (code == 3) ? rng.uniform(0.1, 1.0) : 0.0;
      b[ro].push(rng.pick(ni), o, code, own);
    }
  }

  // Planted schemes. Cycles take groups of three flagged individuals; the
  // rest go to smurfing and role abuse by weight.
  int n_cycle_groups = 0, n_smurf = 0, n_role = 0;
  {
    const double wsum = cfg.smurf_weight + cfg.cycle_weight + cfg.role_abuse_weight;
    n_cycle_groups = static_cast<int>(std::lround(cfg.cycle_weight / wsum * n_pos / 3.0));
    const int rest = n_pos - 3 * n_cycle_groups;
    const double sw = cfg.smurf_weight + cfg.role_abuse_weight;
    n_smurf = sw > 0.0 ? static_cast<int>(std::lround(cfg.smurf_weight / sw * rest)) : rest;
    n_role = rest - n_smurf;
  }

  int cursor = 0;
  for (int c = 0; c < n_cycle_groups; ++c, cursor += 3) {
    const int v[3] = {positives[cursor], positives[cursor + 1], positives[cursor + 2]};
    int ext3[3];
    ext3[0] = rng.pick(nx);
    ext3[1] = other_than(rng, nx, ext3[0]);
    do { ext3[2] = rng.pick(nx); } while (ext3[2] == ext3[0] || ext3[2] == ext3[1]);
    // A forwarder-sized amount rides a closed ring through three externals.
    // Every hop keeps a small cut, so each member alone looks like an
    // ordinary forwarder; the near-conserved closed chain is the tell.
    double amount = rng.lognormal(0.5, 0.4);
    for (int leg = 0; leg < 3; ++leg) {
      b[ix].push(v[leg], ext3[leg], 1, amount);
      const double relay = amount * rng.uniform(0.97, 1.0);
      b[xi].push(ext3[leg], v[(leg + 1) % 3], 1, relay);
      amount = relay * rng.uniform(0.94, 0.99);
    }
  }
  for (int s = 0; s < n_smurf; ++s, ++cursor) {
    const int v = positives[cursor];
    // One busy external account funds a ring of depositors, each of whom
    // passes its top-up to the collector nearly in full. The collector then
    // settles to an organization the way a merchant does, except it keeps
    // almost nothing back. Deposit counts and sizes sit inside the merchant
    // band, so only the two-hop funding trail gives the scheme away.
    const int feeder = rng.pick(n_hub);
    const int k = 7 + std::min(rng.geometric(0.45), 8);
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      const double a = rng.lognormal(-1.2, 0.3);
      total += a;
      const int mule = other_than(rng, ni, v);
      b[xi].push(feeder, mule, 1, a * rng.uniform(1.0, 1.08));
      b[ii].push(mule, v, 1, a);
    }
    b[io].push(v, rng.pick(no), 1, total * rng.uniform(0.90, 0.98));
  }
  for (int s = 0; s < n_role; ++s, ++cursor) {
    const int v = positives[cursor];
    const int o = rng.pick(no);
    // A near-total owner routes external receipts through the organization
    // and drains them in a single salary-sized payment. The organization's
    // usual domestic traffic is untouched, so only the owner-side edge plus
    // the conserved external inflow marks the case.
    b[ro].push(v, o, 3, rng.uniform(0.86, 1.0));
    const int k = 3 + rng.pick(3);
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      const double a = rng.lognormal(0.1, 0.4);
      total += a;
      b[xo].push(rng.pick(nx), o, 1, a);
    }
    b[oi].push(o, v, 1, total * rng.uniform(0.88, 0.96));
  }

  std::vector<NodeTable> nodes(3);
  nodes[0] = {aml::kIndividual, std::move(find)};
  nodes[1] = {aml::kOrganization, std::move(forg)};
  nodes[2] = {aml::kExternal, std::move(fext)};
  std::vector<EdgeTable> tables;
  for (size_t si = 0; si < schema.meta_steps.size(); ++si)
    tables.push_back(b[si].table(schema.meta_steps[si]));

  HeteroGraph g = build_graph(schema, std::move(nodes), std::move(tables));
  g.labels[aml::kIndividual] = labels;

  if (report) {
    report->n_positive = n_pos;
    report->n_smurf = n_smurf;
    report->n_cycle = 3 * n_cycle_groups;
    report->n_role_abuse = n_role;
    double deg_pos = 0, deg_neg = 0, amt_pos = 0, amt_neg = 0;
    std::vector<double> in_deg(ni, 0), in_amt(ni, 0);
    for (int si : {ii, oi, xi}) {
      const EdgeSet& es = g.edges(si);
      for (int e = 0; e < es.size(); ++e) {
        in_deg[es.dst[e]] += 1;
        in_amt[es.dst[e]] += es.features.at(e, aml::kTxnAmount);
      }
    }
    for (int v = 0; v < ni; ++v) {
      (labels[v] ? deg_pos : deg_neg) += in_deg[v];
      (labels[v] ? amt_pos : amt_neg) += in_amt[v];
    }
    report->mean_in_degree_pos = n_pos ? deg_pos / n_pos : 0.0;
    report->mean_in_degree_neg = (ni - n_pos) ? deg_neg / (ni - n_pos) : 0.0;
    report->mean_in_amount_pos = n_pos ? amt_pos / n_pos : 0.0;
    report->mean_in_amount_neg = (ni - n_pos) ? amt_neg / (ni - n_pos) : 0.0;

    report->degree_histogram.assign(schema.node_types.size(), std::vector<long>(13, 0));
    for (size_t t = 0; t < schema.node_types.size(); ++t) {
      std::vector<long> deg(g.node_count(static_cast<int>(t)), 0);
      for (size_t si = 0; si < schema.meta_steps.size(); ++si) {
        const MetaStep& s = schema.meta_steps[si];
        if (s.edge_type != aml::kTxn) continue;
        const EdgeSet& es = g.edges(si);
        if (s.source_type == static_cast<int>(t))
          for (int e = 0; e < es.size(); ++e) ++deg[es.src[e]];
        if (s.target_type == static_cast<int>(t))
          for (int e = 0; e < es.size(); ++e) ++deg[es.dst[e]];
      }
      for (long d : deg) {
        int bucket = 0;
        while ((1L << bucket) <= d && bucket < 12) ++bucket;
        ++report->degree_histogram[t][bucket];
      }
    }
  }
  return g;
}

}  // namespace hmpnn
