#include "evomt/evaluator.hpp"

#include <cmath>

#include "evomt/errors.hpp"
#include "evomt/rng.hpp"

namespace evomt {

void validate(const TaskSpec& task) {
  validate(task.env_config);
  validate(task.architecture);
  if (task.n_fitness_episodes < 1)
    throw ConfigError("TaskSpec: n_fitness_episodes must be >= 1");
  if (task.n_test_episodes < 1) throw ConfigError("TaskSpec: n_test_episodes must be >= 1");
  if (task.architecture.layer_sizes.front() != observation_dim(task.env_config))
    throw ConfigError("TaskSpec: architecture input dim does not match the observation dim");
  if (task.architecture.layer_sizes.back() != action_count(task.env_config))
    throw ConfigError("TaskSpec: architecture output dim does not match the action count");
}

double episode_return(const EnvConfig& env, const Architecture& arch,
                      std::span<const double> weights, std::uint64_t episode_seed) {
  PolicyWorkspace ws;
  auto [state, obs] = reset(env, episode_seed);
  double total = 0.0;
  bool done = false;
  while (!done) {
    const int action = act(arch, weights, std::span<const double>(obs.begin(), obs.end()), ws);
    auto [next, result] = step(state, action, env);
    total += result.reward;
    state = next;
    obs = result.observation;
    done = result.done;
  }
  return total;
}

namespace {

// Mean/std over episodes rolled out with seeds derived from block_seed.
void run_episodes(const UnifiedGenome& genome, const TaskSpec& task, const PartitionMap& map,
                  double w_max, int n_episodes, std::uint64_t block_seed,
                  std::vector<double>& rewards) {
  std::vector<double> weights;
  decode(genome, task.task_index, map, w_max, weights);
  rewards.resize(static_cast<std::size_t>(n_episodes));
  for (int e = 0; e < n_episodes; ++e)
    rewards[static_cast<std::size_t>(e)] = episode_return(
        task.env_config, task.architecture, weights,
        derive_seed(block_seed, static_cast<std::uint64_t>(e)));
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs, double mean) {
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

double fitness(const UnifiedGenome& genome, const TaskSpec& task, const PartitionMap& map,
               double w_max, std::uint64_t block_seed) {
  std::vector<double> rewards;
  run_episodes(genome, task, map, w_max, task.n_fitness_episodes, block_seed, rewards);
  return -mean_of(rewards);
}

EvalReport test_model(const UnifiedGenome& genome, const TaskSpec& task,
                      const PartitionMap& map, double w_max, int n_episodes,
                      std::uint64_t seed) {
  if (n_episodes < 1) throw UsageError("test_model: n_episodes must be >= 1");
  EvalReport report;
  run_episodes(genome, task, map, w_max, n_episodes, seed, report.per_episode_rewards);
  report.episodes_used = n_episodes;
  report.mean_reward = mean_of(report.per_episode_rewards);
  report.std_reward = std_of(report.per_episode_rewards, report.mean_reward);
  return report;
}

RolloutEvaluator::RolloutEvaluator(std::vector<TaskSpec> tasks, PartitionMap map,
                                   double w_max, std::uint64_t run_seed)
    : tasks_(std::move(tasks)), map_(std::move(map)), w_max_(w_max), run_seed_(run_seed) {
  if (tasks_.empty()) throw ConfigError("RolloutEvaluator: no tasks");
  for (const auto& task : tasks_) validate(task);
}

std::uint64_t RolloutEvaluator::block_seed(const TaskSpec& task, const EvalSeed& seed) const {
  // FixedSet: every candidate evaluated in a generation shares one episode
  // block (common random numbers). PerCall: each evaluation gets its own.
  if (task.episode_seed_policy == SeedPolicy::FixedSet)
    return derive_seed(run_seed_, seed_stream::kEpisodes,
                       static_cast<std::uint64_t>(seed.generation));
  return derive_seed(run_seed_, seed_stream::kEpisodes,
                     static_cast<std::uint64_t>(seed.generation), seed.eval_index);
}

double RolloutEvaluator::cost(const UnifiedGenome& genome, int task, const EvalSeed& seed) {
  if (task < 0 || task >= task_count()) throw UsageError("RolloutEvaluator: bad task index");
  const TaskSpec& spec = tasks_[static_cast<std::size_t>(task)];
  return fitness(genome, spec, map_, w_max_, block_seed(spec, seed));
}

void RolloutEvaluator::evaluate_batch_serial(const std::vector<Request>& requests,
                                             std::vector<double>& out) {
  TaskEvaluator::evaluate_batch(requests, out);
}

void RolloutEvaluator::evaluate_batch(const std::vector<Request>& requests,
                                      std::vector<double>& out) {
  out.resize(requests.size());
  const auto n = static_cast<std::ptrdiff_t>(requests.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(parallel > 0 ? parallel : 1)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& req = requests[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = cost(*req.genome, req.task, req.seed);
  }
}

}  // namespace evomt
