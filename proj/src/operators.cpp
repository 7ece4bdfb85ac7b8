#include "evomt/operators.hpp"

#include <cmath>

#include "evomt/errors.hpp"

namespace evomt {

namespace {

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

double sbx_beta(double u, double eta) {
  if (u <= 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0));
  return std::pow(2.0 * (1.0 - u), -1.0 / (eta + 1.0));
}

double sbx_beta_cdf(double x, double eta) {
  if (x <= 0.0) return 0.0;
  if (x <= 1.0) return 0.5 * std::pow(x, eta + 1.0);
  return 1.0 - 0.5 * std::pow(x, -(eta + 1.0));
}

void sbx_crossover(const UnifiedGenome& a, const UnifiedGenome& b, double eta, Rng& rng,
                   UnifiedGenome& child1, UnifiedGenome& child2) {
  if (a.size() != b.size()) throw UsageError("sbx_crossover: parent length mismatch");
  const std::size_t n = a.size();
  child1.resize(n);
  child2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double beta = sbx_beta(rng.uniform(), eta);
    // Symmetric contraction/expansion around the parent midpoint; identical
    // parents are an exact fixed point.
    const double mid = 0.5 * (a[i] + b[i]);
    const double half_spread = 0.5 * beta * (b[i] - a[i]);
    child1[i] = clip01(mid - half_spread);
    child2[i] = clip01(mid + half_spread);
  }
}

std::pair<UnifiedGenome, UnifiedGenome> sbx_crossover(const UnifiedGenome& a,
                                                      const UnifiedGenome& b, double eta,
                                                      std::uint64_t seed) {
  Rng rng(seed);
  UnifiedGenome c1, c2;
  sbx_crossover(a, b, eta, rng, c1, c2);
  return {std::move(c1), std::move(c2)};
}

void polynomial_mutation_inplace(UnifiedGenome& g, double eta_m, double p_gene, Rng& rng) {
  if (p_gene < 0.0 || p_gene > 1.0)
    throw UsageError("polynomial_mutation: p_gene must lie in [0,1]");
  const double mut_pow = 1.0 / (eta_m + 1.0);
  for (double& v : g) {
    if (rng.uniform() >= p_gene) continue;
    const double u = rng.uniform();
    double delta_q;
    if (u <= 0.5) {
      const double xy = 1.0 - v;  // distance to the lower bound, flipped
      delta_q = std::pow(2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta_m + 1.0), mut_pow) - 1.0;
    } else {
      const double xy = v;  // distance to the upper bound, flipped
      delta_q =
          1.0 - std::pow(2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta_m + 1.0), mut_pow);
    }
    v = clip01(v + delta_q);
  }
}

UnifiedGenome polynomial_mutation(const UnifiedGenome& g, double eta_m, double p_gene,
                                  std::uint64_t seed) {
  Rng rng(seed);
  UnifiedGenome out = g;
  polynomial_mutation_inplace(out, eta_m, p_gene, rng);
  return out;
}

}  // namespace evomt
