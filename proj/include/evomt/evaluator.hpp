#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evomt/env.hpp"
#include "evomt/genome.hpp"
#include "evomt/mfea.hpp"
#include "evomt/policy.hpp"

namespace evomt {

enum class SeedPolicy {
  FixedSet,  // one shared episode-seed block per generation (common random numbers)
  PerCall    // fresh block per evaluation
};

// One RL task: which environment with which knobs, which network shape, and
// the episode protocol.
struct TaskSpec {
  int task_index = 0;
  EnvConfig env_config;
  Architecture architecture;
  int n_fitness_episodes = 50;
  int n_test_episodes = 250;
  SeedPolicy episode_seed_policy = SeedPolicy::FixedSet;
};

// Throws ConfigError if the episode counts are invalid or the architecture
// I/O dims don't match the environment.
void validate(const TaskSpec& task);

struct EvalReport {
  double mean_reward = 0.0;
  double std_reward = 0.0;  // population standard deviation
  std::vector<double> per_episode_rewards;
  int episodes_used = 0;
};

// Total reward of one full greedy-policy episode; pure in all arguments.
double episode_return(const EnvConfig& env, const Architecture& arch,
                      std::span<const double> weights, std::uint64_t episode_seed);

// Factorial objective (minimization sign): decode for the task, run
// n_fitness_episodes with episode seeds derived from block_seed, return the
// negated mean return.
double fitness(const UnifiedGenome& genome, const TaskSpec& task, const PartitionMap& map,
               double w_max, std::uint64_t block_seed);

// Held-out evaluation over n_episodes fresh seeds derived from seed; reported
// in reward (maximization) sign.
EvalReport test_model(const UnifiedGenome& genome, const TaskSpec& task,
                      const PartitionMap& map, double w_max, int n_episodes,
                      std::uint64_t seed);

// TaskEvaluator that rolls genomes out on the configured environments.
// evaluate_batch runs the OpenMP kernel (worker count = parallel); the serial
// reference path is evaluate_batch_serial, and both produce bit-identical
// results because every evaluation derives its own seed chain.
class RolloutEvaluator : public TaskEvaluator {
 public:
  RolloutEvaluator(std::vector<TaskSpec> tasks, PartitionMap map, double w_max,
                   std::uint64_t run_seed);

  int task_count() const override { return static_cast<int>(tasks_.size()); }
  double cost(const UnifiedGenome& genome, int task, const EvalSeed& seed) override;
  void evaluate_batch(const std::vector<Request>& requests, std::vector<double>& out) override;
  void evaluate_batch_serial(const std::vector<Request>& requests, std::vector<double>& out);

  // Episode-seed block for one evaluation, per the task's seed policy.
  std::uint64_t block_seed(const TaskSpec& task, const EvalSeed& seed) const;

  const std::vector<TaskSpec>& tasks() const { return tasks_; }
  const PartitionMap& map() const { return map_; }
  double w_max() const { return w_max_; }
  std::uint64_t run_seed() const { return run_seed_; }

  int parallel = 1;  // OpenMP worker count used by evaluate_batch

 private:
  std::vector<TaskSpec> tasks_;
  PartitionMap map_;
  double w_max_;
  std::uint64_t run_seed_;
};

}  // namespace evomt
