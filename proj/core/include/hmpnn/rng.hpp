#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hmpnn {

// mt19937_64 with hand-rolled samplers. The standard distributions are
// implementation-defined, so rolling our own keeps generated graphs and
// walks bit-stable across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() {
    return (eng_() >> 11) * (1.0 / 9007199254740992.0);  // 53 random bits
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int pick(int n) { return static_cast<int>(eng_() % static_cast<uint64_t>(n)); }

  double normal() {
    // Box-Muller, one value per call (the spare is discarded to keep the
    // stream position independent of call parity).
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  double normal(double mu, double sigma) { return mu + sigma * normal(); }
  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

  int poisson(double lambda) {
    // Knuth multiplication method; fine for the small lambdas used here.
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  // Failures before the first success, success probability p.
  int geometric(double p) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return static_cast<int>(std::floor(std::log(u) / std::log(1.0 - p)));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hmpnn
