#pragma once

#include <cstdint>
#include <utility>

#include "evomt/genome.hpp"
#include "evomt/rng.hpp"

namespace evomt {

// Simulated binary crossover on the [0,1] box, applied to every gene, with
// boundary clipping. The generation loop passes a shared Rng; the seed-taking
// overload exists for standalone deterministic use.
void sbx_crossover(const UnifiedGenome& a, const UnifiedGenome& b, double eta, Rng& rng,
                   UnifiedGenome& child1, UnifiedGenome& child2);

std::pair<UnifiedGenome, UnifiedGenome> sbx_crossover(const UnifiedGenome& a,
                                                      const UnifiedGenome& b, double eta,
                                                      std::uint64_t seed);

// SBX spread factor for a uniform draw u — exposed for the distribution test.
double sbx_beta(double u, double eta);

// Analytic CDF of the spread factor, P(beta <= x).
double sbx_beta_cdf(double x, double eta);

// Boundary-aware polynomial mutation on [0,1]: each gene is mutated with
// probability p_gene.
void polynomial_mutation_inplace(UnifiedGenome& g, double eta_m, double p_gene, Rng& rng);

UnifiedGenome polynomial_mutation(const UnifiedGenome& g, double eta_m, double p_gene,
                                  std::uint64_t seed);

}  // namespace evomt
