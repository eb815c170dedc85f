#include <algorithm>
#include <cstdio>
#include <map>
#include <vector>

#include "hmpnn/metrics.hpp"
#include "hmpnn/model.hpp"

namespace hmpnn {

namespace {

int model_rank(const std::string& name) {
  static const char* order[] = {"logreg", "mlp", "hgraphsage", "hmpnn-sum", "hmpnn-ct"};
  for (int i = 0; i < 5; ++i)
    if (name == order[i]) return i;
  return 5;
}

struct Averaged {
  MetricsRow mean;
  int n_seeds = 0;
};

}  // namespace

std::string render_report(const std::vector<MetricsRow>& rows) {
  // Average metrics over seeds per (model, layers).
  std::map<std::pair<int, std::pair<std::string, int>>, Averaged> groups;
  for (const MetricsRow& r : rows) {
    auto key = std::make_pair(model_rank(r.model), std::make_pair(r.model, r.layers));
    Averaged& g = groups[key];
    if (g.n_seeds == 0) {
      g.mean = r;
      g.mean.seed = 0;
    } else {
      g.mean.pr += r.pr;
      g.mean.roc += r.roc;
      for (int i = 0; i < 4; ++i) {
        g.mean.prec[i] += r.prec[i];
        g.mean.lift[i] += r.lift[i];
      }
    }
    ++g.n_seeds;
  }

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %6s %5s %7s %8s  %7s %7s %8s %8s  %7s %7s %8s %8s\n",
                "model", "layers", "seeds", "pr_auc", "roc_auc", "prec@1", "prec@5", "prec@10",
                "prec@50", "lift@1", "lift@5", "lift@10", "lift@50");
  out += buf;
  out += std::string(115, '-') + "\n";

  std::string last_model;
  for (auto& [key, g] : groups) {
    const double n = g.n_seeds;
    if (!last_model.empty() && key.second.first != last_model) out += "\n";
    last_model = key.second.first;
    std::snprintf(buf, sizeof(buf),
                  "%-12s %6d %5d %7.3f %8.3f  %7.3f %7.3f %8.3f %8.3f  %7.1f %7.1f %8.1f %8.1f\n",
                  key.second.first.c_str(), key.second.second, g.n_seeds, g.mean.pr / n,
                  g.mean.roc / n, g.mean.prec[0] / n, g.mean.prec[1] / n, g.mean.prec[2] / n,
                  g.mean.prec[3] / n, g.mean.lift[0] / n, g.mean.lift[1] / n, g.mean.lift[2] / n,
                  g.mean.lift[3] / n);
    out += buf;
  }
  return out;
}

}  // namespace hmpnn
