#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace evomt {

// splitmix64 finalizer. Used as the mixing step of the seed-derivation chain;
// strong enough that derived streams are statistically independent for our use.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive a child seed from a base seed plus any number of stream labels.
// Every source of randomness in the engine is keyed this way (run index,
// generation, candidate index, episode index, ...) so that results are
// identical for serial and parallel schedules and so that resume never needs
// to serialize generator state.
inline std::uint64_t derive_seed(std::uint64_t base) { return splitmix64(base); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t label, Rest... rest) {
  return derive_seed(splitmix64(base ^ (label + 0x9e3779b97f4a7c15ULL)), rest...);
}

// Stream labels for the independent substreams derived from a run seed.
// Values are arbitrary but fixed forever: changing one silently changes
// every artifact byte.
namespace seed_stream {
inline constexpr std::uint64_t kInit = 0xA1;      // initial population genomes
inline constexpr std::uint64_t kMating = 0xA2;    // per-generation mating RNG
inline constexpr std::uint64_t kEpisodes = 0xA3;  // fitness episode blocks
inline constexpr std::uint64_t kTest = 0xA4;      // held-out test episodes
inline constexpr std::uint64_t kRun = 0xA5;       // per-run seeds from base seed
}  // namespace seed_stream

// Deterministic uniform generator. Wraps mt19937_64 but converts to doubles
// manually: the std distributions are not bit-stable across standard library
// implementations, and artifact reproducibility depends on the exact stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n), n >= 1, by rejection sampling.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t max = ~0ULL;
    const std::uint64_t limit = max - max % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// In-place Fisher-Yates shuffle driven by Rng. std::shuffle is avoided for
// the same bit-stability reason as the std distributions.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_int(i)]);
  }
}

}  // namespace evomt
