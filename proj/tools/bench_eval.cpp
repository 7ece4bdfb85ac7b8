// Compares the OpenMP rollout-evaluation kernel against the serial reference
// on the same request batch, checks the outputs are bit-identical, and prints
// wall-clock timings.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "evomt/evaluator.hpp"
#include "evomt/genome.hpp"
#include "evomt/harness.hpp"
#include "evomt/rng.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rollout evaluation benchmark: serial reference vs OpenMP kernel"};
  int n_requests = 64;
  int threads = 0;  // 0 = OpenMP default
  int episodes = 20;
  std::uint64_t seed = 1;
  app.add_option("--requests", n_requests, "batch size")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP worker count (0 = library default)");
  app.add_option("--episodes", episodes, "fitness episodes per evaluation")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "base seed");
  CLI11_PARSE(app, argc, argv);

  evomt::ExperimentConfig cfg;
  cfg.name = "bench";
  cfg.task_presets = {"cartpole:A", "acrobot:A", "pendulum:A"};
  cfg.output_dir = "unused";
  cfg.n_fitness_episodes = episodes;
  const evomt::ProblemSetup setup = evomt::build_problem(cfg);

  evomt::RolloutEvaluator evaluator(setup.tasks, setup.map, cfg.w_max, seed);

  // A batch of random genomes spread across the tasks, mirroring what one
  // generation of offspring evaluation looks like.
  std::vector<evomt::UnifiedGenome> genomes;
  genomes.reserve(static_cast<std::size_t>(n_requests));
  for (int i = 0; i < n_requests; ++i)
    genomes.push_back(evomt::random_genome(
        setup.map, evomt::derive_seed(seed, evomt::seed_stream::kInit,
                                      static_cast<std::uint64_t>(i))));
  std::vector<evomt::TaskEvaluator::Request> requests;
  for (int i = 0; i < n_requests; ++i)
    requests.push_back({&genomes[static_cast<std::size_t>(i)],
                        i % static_cast<int>(setup.tasks.size()),
                        evomt::EvalSeed{1, i}});

  std::vector<double> serial_out, parallel_out;

  const auto t_serial = Clock::now();
  evaluator.evaluate_batch_serial(requests, serial_out);
  const double serial_s = seconds_since(t_serial);

#ifdef _OPENMP
  evaluator.parallel = threads > 0 ? threads : omp_get_max_threads();
#else
  evaluator.parallel = 1;
#endif
  const auto t_parallel = Clock::now();
  evaluator.evaluate_batch(requests, parallel_out);
  const double parallel_s = seconds_since(t_parallel);

  const bool identical =
      serial_out.size() == parallel_out.size() &&
      std::memcmp(serial_out.data(), parallel_out.data(),
                  serial_out.size() * sizeof(double)) == 0;

  std::printf("requests:          %d (%zu tasks, %d episodes each)\n", n_requests,
              setup.tasks.size(), episodes);
  std::printf("serial reference:  %.3f s\n", serial_s);
  std::printf("openmp kernel:     %.3f s (%d workers)\n", parallel_s, evaluator.parallel);
  std::printf("speedup:           %.2fx\n", parallel_s > 0 ? serial_s / parallel_s : 0.0);
  std::printf("bitwise identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
