#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "evomt/errors.hpp"
#include "evomt/evaluator.hpp"
#include "evomt/genome.hpp"
#include "evomt/rng.hpp"

using namespace evomt;

namespace {

TaskSpec make_task(const char* preset, int n_fit = 5, int n_test = 5) {
  TaskSpec task;
  task.task_index = 0;
  task.env_config = env_preset(preset);
  task.architecture =
      default_architecture(observation_dim(task.env_config), action_count(task.env_config));
  task.n_fitness_episodes = n_fit;
  task.n_test_episodes = n_test;
  return task;
}

PartitionMap map_for(const TaskSpec& task) {
  return build_partition_map({task.architecture}, 3);
}

// Scripted rollout: fixed action every step, summing rewards — no policy
// machinery involved.
double scripted_return(const EnvConfig& env, int action, std::uint64_t seed) {
  auto [state, obs] = reset(env, seed);
  double total = 0.0;
  bool done = false;
  while (!done) {
    const auto [next, r] = step(state, action, env);
    total += r.reward;
    state = next;
    done = r.done;
  }
  return total;
}

}  // namespace

TEST_CASE("task validation catches mismatched networks") {
  TaskSpec task = make_task("cartpole:A");
  CHECK_NOTHROW(validate(task));
  task.architecture = default_architecture(3, 2);  // wrong input dim
  CHECK_THROWS_AS(validate(task), ConfigError);
  task = make_task("pendulum:A");
  task.architecture = default_architecture(3, 4);  // wrong action count
  CHECK_THROWS_AS(validate(task), ConfigError);
  task = make_task("acrobot:A");
  task.n_fitness_episodes = 0;
  CHECK_THROWS_AS(validate(task), ConfigError);
}

TEST_CASE("zero-weight genome on pendulum equals a scripted constant-action rollout") {
  const TaskSpec task = make_task("pendulum:A", 8);
  const PartitionMap map = map_for(task);
  const UnifiedGenome genome(static_cast<std::size_t>(map.total_dim), 0.5);

  // All-zero weights give all-equal logits; the tie-break picks bin 0, the
  // most negative torque.
  const std::uint64_t block = 424242;
  double sum = 0.0;
  for (int e = 0; e < task.n_fitness_episodes; ++e)
    sum += scripted_return(task.env_config, 0,
                           derive_seed(block, static_cast<std::uint64_t>(e)));
  const double expected = -(sum / task.n_fitness_episodes);
  CHECK(fitness(genome, task, map, 4.0, block) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fitness: cartpole values live in [-300, -1] and repeat exactly") {
  const TaskSpec task = make_task("cartpole:A", 4);
  const PartitionMap map = map_for(task);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const UnifiedGenome genome = random_genome(map, s);
    const double f = fitness(genome, task, map, 4.0, 100 + s);
    CHECK(f >= -300.0);
    CHECK(f <= -1.0);
    CHECK(fitness(genome, task, map, 4.0, 100 + s) == f);
  }
}

TEST_CASE("test_model: singleton statistics and the sign convention") {
  const TaskSpec task = make_task("cartpole:B");
  const PartitionMap map = map_for(task);
  const UnifiedGenome genome = random_genome(map, 77);

  const EvalReport single = test_model(genome, task, map, 4.0, 1, 5);
  CHECK(single.episodes_used == 1);
  REQUIRE(single.per_episode_rewards.size() == 1);
  CHECK(single.mean_reward == single.per_episode_rewards[0]);
  CHECK(single.std_reward == 0.0);
  CHECK(single.mean_reward <= 300.0);

  // fitness = -test_model.mean on identical seeds and episode counts.
  TaskSpec aligned = task;
  aligned.n_fitness_episodes = 6;
  const EvalReport report = test_model(genome, aligned, map, 4.0, 6, 99);
  CHECK(fitness(genome, aligned, map, 4.0, 99) == -report.mean_reward);

  CHECK_THROWS_AS(test_model(genome, task, map, 4.0, 0, 1), UsageError);
}

TEST_CASE("per-episode rewards are a pure function of the episode seed set") {
  const TaskSpec task = make_task("pendulum:B", 6, 6);
  const PartitionMap map = map_for(task);
  const UnifiedGenome genome = random_genome(map, 3);
  const EvalReport report = test_model(genome, task, map, 4.0, 6, 1234);

  // Recompute each episode independently, in a shuffled order; the multiset
  // of rewards must match.
  std::vector<double> weights = decode(genome, 0, map, 4.0);
  std::vector<int> order = {3, 0, 5, 1, 4, 2};
  std::vector<double> manual;
  for (int e : order) {
    const std::uint64_t seed = derive_seed(1234, static_cast<std::uint64_t>(e));
    manual.push_back(episode_return(task.env_config, task.architecture, weights, seed));
  }
  std::vector<double> got = report.per_episode_rewards;
  std::sort(manual.begin(), manual.end());
  std::sort(got.begin(), got.end());
  CHECK(got == manual);
}

TEST_CASE("disjoint 250-episode blocks agree within the two-sample CLT bound") {
  const TaskSpec task = make_task("cartpole:A");
  const PartitionMap map = map_for(task);
  const UnifiedGenome genome = random_genome(map, 2026);
  const int n = 250;
  int ok = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const EvalReport a =
        test_model(genome, task, map, 4.0, n, derive_seed(9000, static_cast<std::uint64_t>(2 * t)));
    const EvalReport b = test_model(genome, task, map, 4.0, n,
                                    derive_seed(9000, static_cast<std::uint64_t>(2 * t + 1)));
    // Difference of two independent n-episode means has standard deviation
    // sigma * sqrt(2/n).
    const double bound = 2.0 * a.std_reward * std::sqrt(2.0 / n);
    if (std::abs(a.mean_reward - b.mean_reward) <= bound) ++ok;
  }
  CHECK(ok >= trials * 90 / 100);
}

TEST_CASE("rollout evaluator: seed policies") {
  TaskSpec task = make_task("cartpole:A", 3);
  const PartitionMap map = map_for(task);

  SUBCASE("fixed-set shares one block per generation") {
    std::vector<TaskSpec> tasks = {task};
    RolloutEvaluator eval(tasks, map, 4.0, 500);
    const UnifiedGenome genome = random_genome(map, 1);
    const double c1 = eval.cost(genome, 0, EvalSeed{4, 0});
    const double c2 = eval.cost(genome, 0, EvalSeed{4, 71});
    CHECK(c1 == c2);
    CHECK(eval.block_seed(tasks[0], EvalSeed{4, 0}) ==
          derive_seed(500, seed_stream::kEpisodes, 4));
    // A different generation rotates the block.
    const double c3 = eval.cost(genome, 0, EvalSeed{5, 0});
    CHECK(c3 != c1);
  }

  SUBCASE("per-call keys the block on the evaluation index too") {
    task.episode_seed_policy = SeedPolicy::PerCall;
    std::vector<TaskSpec> tasks = {task};
    RolloutEvaluator eval(tasks, map, 4.0, 500);
    const UnifiedGenome genome = random_genome(map, 1);
    CHECK(eval.cost(genome, 0, EvalSeed{4, 0}) != eval.cost(genome, 0, EvalSeed{4, 71}));
  }
}

TEST_CASE("rollout evaluator: batch kernel matches the serial reference bitwise") {
  std::vector<TaskSpec> tasks = {make_task("cartpole:A", 2), make_task("pendulum:A", 2),
                                 make_task("acrobot:A", 2)};
  for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i].task_index = static_cast<int>(i);
  std::vector<Architecture> archs;
  for (const auto& t : tasks) archs.push_back(t.architecture);
  const PartitionMap map = build_partition_map(archs, 3);

  RolloutEvaluator eval(tasks, map, 4.0, 9001);
  std::vector<UnifiedGenome> genomes;
  for (std::uint64_t s = 0; s < 12; ++s) genomes.push_back(random_genome(map, s));
  std::vector<TaskEvaluator::Request> requests;
  for (int i = 0; i < 12; ++i)
    requests.push_back({&genomes[static_cast<std::size_t>(i)], i % 3,
                        EvalSeed{1, static_cast<std::uint64_t>(i)}});

  std::vector<double> serial, parallel;
  eval.evaluate_batch_serial(requests, serial);
  eval.parallel = 4;
  eval.evaluate_batch(requests, parallel);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i] == parallel[i]);

  // And each slot equals a direct cost call.
  for (std::size_t i = 0; i < requests.size(); ++i)
    CHECK(serial[i] == eval.cost(*requests[i].genome, requests[i].task, requests[i].seed));
}

TEST_CASE("rollout evaluator: argument checks") {
  const TaskSpec task = make_task("cartpole:A", 2);
  const PartitionMap map = map_for(task);
  std::vector<TaskSpec> tasks = {task};
  RolloutEvaluator eval(tasks, map, 4.0, 1);
  const UnifiedGenome genome = random_genome(map, 1);
  CHECK_THROWS_AS(eval.cost(genome, 1, EvalSeed{0, 0}), UsageError);
  CHECK_THROWS_AS(eval.cost(genome, -1, EvalSeed{0, 0}), UsageError);
  CHECK_THROWS_AS(RolloutEvaluator(std::vector<TaskSpec>{}, map, 4.0, 1), ConfigError);
}
