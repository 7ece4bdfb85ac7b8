#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "evomt/errors.hpp"
#include "evomt/operators.hpp"
#include "evomt/rng.hpp"

using namespace evomt;

namespace {

UnifiedGenome random_vec(std::size_t n, Rng& rng, double lo = 0.0, double hi = 1.0) {
  UnifiedGenome v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("sbx: identical parents are a fixed point") {
  Rng rng(3);
  const UnifiedGenome p = random_vec(64, rng);
  const auto [c1, c2] = sbx_crossover(p, p, 15.0, 111);
  CHECK(c1 == p);
  CHECK(c2 == p);
}

TEST_CASE("sbx: per-gene midpoint identity wherever clipping did not engage") {
  Rng rng(4);
  int unclipped = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const UnifiedGenome a = random_vec(32, rng);
    const UnifiedGenome b = random_vec(32, rng);
    const auto [c1, c2] = sbx_crossover(a, b, 2.0, 1000 + static_cast<std::uint64_t>(trial));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const bool clipped = c1[i] == 0.0 || c1[i] == 1.0 || c2[i] == 0.0 || c2[i] == 1.0;
      if (clipped) continue;
      ++unclipped;
      CHECK(c1[i] + c2[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-12));
    }
  }
  CHECK(unclipped > 500);  // the identity was actually exercised
}

TEST_CASE("sbx: children stay inside the unit box") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const UnifiedGenome a = random_vec(16, rng);
    const UnifiedGenome b = random_vec(16, rng);
    const auto [c1, c2] = sbx_crossover(a, b, 0.5, static_cast<std::uint64_t>(trial));
    for (double v : c1) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (double v : c2) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("sbx: deterministic per seed and consistent with the Rng overload") {
  Rng rng(6);
  const UnifiedGenome a = random_vec(8, rng);
  const UnifiedGenome b = random_vec(8, rng);
  const auto [c1, c2] = sbx_crossover(a, b, 15.0, 77);
  const auto [d1, d2] = sbx_crossover(a, b, 15.0, 77);
  CHECK(c1 == d1);
  CHECK(c2 == d2);
  Rng stream(77);
  UnifiedGenome e1, e2;
  sbx_crossover(a, b, 15.0, stream, e1, e2);
  CHECK(e1 == c1);
  CHECK(e2 == c2);
}

TEST_CASE("sbx: length mismatch is a usage error") {
  const UnifiedGenome a(4, 0.5), b(5, 0.5);
  CHECK_THROWS_AS(sbx_crossover(a, b, 15.0, 1), UsageError);
}

TEST_CASE("sbx: spread factor matches the analytic CDF (Kolmogorov distance)") {
  const double eta = 15.0;
  const int n = 100000;
  Rng rng(2718);
  std::vector<double> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) samples.push_back(sbx_beta(rng.uniform(), eta));
  std::sort(samples.begin(), samples.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = sbx_beta_cdf(samples[static_cast<std::size_t>(i)], eta);
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("sbx: analytic CDF sanity") {
  // Median at beta = 1 and monotone growth.
  CHECK(sbx_beta_cdf(1.0, 15.0) == doctest::Approx(0.5));
  CHECK(sbx_beta_cdf(0.5, 15.0) < sbx_beta_cdf(0.9, 15.0));
  CHECK(sbx_beta_cdf(1.1, 15.0) > 0.5);
  CHECK(sbx_beta_cdf(0.0, 15.0) == doctest::Approx(0.0));
  // The spread factor from u=0.5 is exactly 1.
  CHECK(sbx_beta(0.5, 15.0) == doctest::Approx(1.0));
}

TEST_CASE("mutation: p_gene = 0 is a no-op") {
  Rng rng(7);
  const UnifiedGenome g = random_vec(128, rng);
  CHECK(polynomial_mutation(g, 20.0, 0.0, 5) == g);
}

TEST_CASE("mutation: outputs stay in [0,1] even from the boundary") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    UnifiedGenome g = random_vec(32, rng);
    g[0] = 0.0;
    g[1] = 1.0;
    const UnifiedGenome m = polynomial_mutation(g, 5.0, 1.0, static_cast<std::uint64_t>(trial));
    for (double v : m) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("mutation: perturbation size shrinks as eta_m grows") {
  const std::vector<double> etas = {5.0, 20.0, 100.0};
  std::vector<double> mean_abs;
  for (double eta : etas) {
    Rng rng(42);
    double acc = 0.0;
    int count = 0;
    for (int chunk = 0; chunk < 100; ++chunk) {
      UnifiedGenome g = random_vec(1000, rng);
      const UnifiedGenome m =
          polynomial_mutation(g, eta, 1.0, 9000 + static_cast<std::uint64_t>(chunk));
      for (std::size_t i = 0; i < g.size(); ++i) {
        acc += std::abs(m[i] - g[i]);
        ++count;
      }
    }
    mean_abs.push_back(acc / count);
  }
  CHECK(mean_abs[0] > mean_abs[1]);
  CHECK(mean_abs[1] > mean_abs[2]);
}

TEST_CASE("mutation: deterministic per seed; Rng overload agrees") {
  Rng rng(9);
  const UnifiedGenome g = random_vec(64, rng);
  const UnifiedGenome m1 = polynomial_mutation(g, 20.0, 0.3, 55);
  const UnifiedGenome m2 = polynomial_mutation(g, 20.0, 0.3, 55);
  CHECK(m1 == m2);
  Rng stream(55);
  UnifiedGenome m3 = g;
  polynomial_mutation_inplace(m3, 20.0, 0.3, stream);
  CHECK(m3 == m1);
}

TEST_CASE("mutation: p_gene controls how many genes move") {
  Rng rng(10);
  const UnifiedGenome g = random_vec(10000, rng);
  const UnifiedGenome m = polynomial_mutation(g, 20.0, 0.1, 77);
  int moved = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (m[i] != g[i]) ++moved;
  // Binomial(10000, 0.1): mean 1000, std ~30; a 6-sigma band.
  CHECK(moved > 820);
  CHECK(moved < 1180);
}
