#include "evomt/mfea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evomt/errors.hpp"
#include "evomt/operators.hpp"

namespace evomt {

void validate(const MfeaConfig& cfg) {
  if (cfg.population_size < 4 || cfg.population_size % 2 != 0)
    throw ConfigError("MfeaConfig: population_size must be even and >= 4");
  if (cfg.generations < 0) throw ConfigError("MfeaConfig: generations must be >= 0");
  if (cfg.rmp < 0.0 || cfg.rmp > 1.0) throw ConfigError("MfeaConfig: rmp must lie in [0,1]");
  if (cfg.sbx_eta < 0.0 || cfg.mutation_eta < 0.0)
    throw ConfigError("MfeaConfig: distribution indices must be non-negative");
  if (cfg.mutation_prob_per_gene > 1.0)
    throw ConfigError("MfeaConfig: mutation_prob_per_gene must be <= 1");
}

void TaskEvaluator::evaluate_batch(const std::vector<Request>& requests,
                                   std::vector<double>& out) {
  out.resize(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i)
    out[i] = cost(*requests[i].genome, requests[i].task, requests[i].seed);
}

std::vector<std::vector<int>> compute_factorial_ranks(
    const std::vector<std::vector<double>>& costs) {
  if (costs.empty()) throw UsageError("compute_factorial_ranks: empty population");
  const int p = static_cast<int>(costs.size());
  const int k = static_cast<int>(costs.front().size());
  std::vector<std::vector<int>> ranks(costs.size(), std::vector<int>(costs.front().size()));
  std::vector<int> order(costs.size());
  for (int task = 0; task < k; ++task) {
    std::iota(order.begin(), order.end(), 0);
    // Stable sort on cost alone: equal costs (and all unevaluated sentinels)
    // keep candidate-index order, which is exactly the stated tie rule.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return costs[static_cast<std::size_t>(a)][static_cast<std::size_t>(task)] <
             costs[static_cast<std::size_t>(b)][static_cast<std::size_t>(task)];
    });
    for (int pos = 0; pos < p; ++pos)
      ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])]
           [static_cast<std::size_t>(task)] = pos + 1;
  }
  return ranks;
}

void update_scalar_fitness_and_skill(std::vector<FactorialRecord>& records) {
  for (auto& rec : records) {
    int best_rank = 0;
    int best_task = -1;
    for (int task = 0; task < static_cast<int>(rec.factorial_ranks.size()); ++task) {
      const int r = rec.factorial_ranks[static_cast<std::size_t>(task)];
      if (best_task < 0 || r < best_rank) {
        best_rank = r;
        best_task = task;
      }
    }
    rec.scalar_fitness = 1.0 / static_cast<double>(best_rank);
    rec.skill_factor = best_task;
  }
}

std::vector<int> select_survivor_indices(const std::vector<Candidate>& merged, int p) {
  if (static_cast<int>(merged.size()) < p)
    throw UsageError("select_survivor_indices: merged population smaller than P");
  std::vector<int> order(merged.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ca = merged[static_cast<std::size_t>(a)];
    const auto& cb = merged[static_cast<std::size_t>(b)];
    if (ca.record.scalar_fitness != cb.record.scalar_fitness)
      return ca.record.scalar_fitness > cb.record.scalar_fitness;
    if (ca.birth_order != cb.birth_order) return ca.birth_order < cb.birth_order;
    return a < b;
  });
  order.resize(static_cast<std::size_t>(p));
  return order;
}

int assign_evaluation_task(bool crossover_child, int parent_skill_a, int parent_skill_b,
                           Rng& rng) {
  if (!crossover_child) return parent_skill_a;
  return rng.uniform() < 0.5 ? parent_skill_a : parent_skill_b;
}

MatingOutcome assortative_mating(const Candidate& p1, const Candidate& p2,
                                 const MfeaConfig& cfg, double p_gene, Rng& rng) {
  MatingOutcome m;
  const int tau1 = p1.record.skill_factor;
  const int tau2 = p2.record.skill_factor;
  const double r = rng.uniform();
  if (tau1 == tau2 || r < cfg.rmp) {
    m.crossover = true;
    sbx_crossover(p1.genome, p2.genome, cfg.sbx_eta, rng, m.child[0], m.child[1]);
    polynomial_mutation_inplace(m.child[0], cfg.mutation_eta, p_gene, rng);
    polynomial_mutation_inplace(m.child[1], cfg.mutation_eta, p_gene, rng);
    m.assigned_task[0] = assign_evaluation_task(true, tau1, tau2, rng);
    m.assigned_task[1] = assign_evaluation_task(true, tau1, tau2, rng);
  } else {
    m.crossover = false;
    m.child[0] = p1.genome;
    m.child[1] = p2.genome;
    polynomial_mutation_inplace(m.child[0], cfg.mutation_eta, p_gene, rng);
    polynomial_mutation_inplace(m.child[1], cfg.mutation_eta, p_gene, rng);
    m.assigned_task[0] = assign_evaluation_task(false, tau1, tau1, rng);
    m.assigned_task[1] = assign_evaluation_task(false, tau2, tau2, rng);
  }
  return m;
}

GenerationStats population_stats(const std::vector<Candidate>& population, int task_count,
                                 int generation) {
  GenerationStats s;
  s.generation = generation;
  s.best_cost.assign(static_cast<std::size_t>(task_count), kUnevaluated);
  s.mean_cost.assign(static_cast<std::size_t>(task_count), 0.0);
  s.std_cost.assign(static_cast<std::size_t>(task_count), 0.0);
  s.evaluated.assign(static_cast<std::size_t>(task_count), 0);
  for (int task = 0; task < task_count; ++task) {
    const auto t = static_cast<std::size_t>(task);
    double sum = 0.0, sum_sq = 0.0;
    int n = 0;
    for (const auto& cand : population) {
      const double c = cand.record.factorial_costs[t];
      if (c == kUnevaluated) continue;
      s.best_cost[t] = std::min(s.best_cost[t], c);
      sum += c;
      sum_sq += c * c;
      ++n;
    }
    s.evaluated[t] = n;
    if (n > 0) {
      const double mean = sum / n;
      s.mean_cost[t] = mean;
      const double var = std::max(0.0, sum_sq / n - mean * mean);
      s.std_cost[t] = std::sqrt(var);
    }
  }
  return s;
}

MfeaEngine::MfeaEngine(const MfeaConfig& cfg, int genome_dim, TaskEvaluator& evaluator)
    : cfg_(cfg),
      genome_dim_(genome_dim),
      task_count_(evaluator.task_count()),
      evaluator_(&evaluator) {
  validate(cfg_);
  if (genome_dim_ <= 0) throw ConfigError("MfeaEngine: genome_dim must be positive");
  if (task_count_ <= 0) throw ConfigError("MfeaEngine: evaluator reports no tasks");
  p_gene_ = cfg_.mutation_prob_per_gene < 0.0 ? 1.0 / static_cast<double>(genome_dim_)
                                              : cfg_.mutation_prob_per_gene;
  best_ever_.assign(static_cast<std::size_t>(task_count_), TaskBest{});
}

void MfeaEngine::rank_and_score(std::vector<Candidate>& pop) const {
  std::vector<std::vector<double>> costs;
  costs.reserve(pop.size());
  for (const auto& cand : pop) costs.push_back(cand.record.factorial_costs);
  const auto ranks = compute_factorial_ranks(costs);
  std::vector<FactorialRecord> records;
  records.reserve(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    pop[i].record.factorial_ranks = ranks[i];
    records.push_back(pop[i].record);
  }
  update_scalar_fitness_and_skill(records);
  for (std::size_t i = 0; i < pop.size(); ++i) pop[i].record = std::move(records[i]);
}

void MfeaEngine::note_best(int task, double cost, const UnifiedGenome& genome) {
  auto& best = best_ever_[static_cast<std::size_t>(task)];
  if (cost < best.cost) {
    best.cost = cost;
    best.genome = genome;
  }
}

void MfeaEngine::initialize() {
  population_.clear();
  events_.clear();
  generation_ = 0;
  next_birth_ = 0;
  eval_count_ = 0;
  best_ever_.assign(static_cast<std::size_t>(task_count_), TaskBest{});

  const int p = cfg_.population_size;
  population_.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    auto& cand = population_[static_cast<std::size_t>(i)];
    cand.genome.resize(static_cast<std::size_t>(genome_dim_));
    Rng rng(derive_seed(cfg_.seed, seed_stream::kInit, static_cast<std::uint64_t>(i)));
    for (double& v : cand.genome) v = rng.uniform();
    cand.record.factorial_costs.assign(static_cast<std::size_t>(task_count_), kUnevaluated);
    cand.birth_order = next_birth_++;
  }

  // Full evaluation of the initial population on every task (required for the
  // initial skill factors).
  std::vector<TaskEvaluator::Request> requests;
  requests.reserve(static_cast<std::size_t>(p) * static_cast<std::size_t>(task_count_));
  for (int i = 0; i < p; ++i)
    for (int task = 0; task < task_count_; ++task)
      requests.push_back({&population_[static_cast<std::size_t>(i)].genome, task,
                          EvalSeed{0, static_cast<std::uint64_t>(i) *
                                          static_cast<std::uint64_t>(task_count_) +
                                      static_cast<std::uint64_t>(task)}});
  std::vector<double> costs;
  evaluator_->evaluate_batch(requests, costs);
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const auto i = r / static_cast<std::size_t>(task_count_);
    const auto task = static_cast<int>(r % static_cast<std::size_t>(task_count_));
    population_[i].record.factorial_costs[static_cast<std::size_t>(task)] = costs[r];
    note_best(task, costs[r], population_[i].genome);
  }
  eval_count_ += static_cast<long long>(requests.size());

  rank_and_score(population_);
  initialized_ = true;
}

void MfeaEngine::step_generation() {
  if (!initialized_) throw UsageError("MfeaEngine: step_generation before initialize");
  const int p = cfg_.population_size;
  const int g = generation_ + 1;
  Rng mate_rng(derive_seed(cfg_.seed, seed_stream::kMating, static_cast<std::uint64_t>(g)));

  // Best current cost per task, snapshotted before any offspring exists;
  // the "improved" flag compares against this, making it schedule-independent.
  std::vector<double> best_at_start(static_cast<std::size_t>(task_count_), kUnevaluated);
  for (const auto& cand : population_)
    for (int task = 0; task < task_count_; ++task)
      best_at_start[static_cast<std::size_t>(task)] =
          std::min(best_at_start[static_cast<std::size_t>(task)],
                   cand.record.factorial_costs[static_cast<std::size_t>(task)]);

  std::vector<int> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, mate_rng);

  std::vector<Candidate> offspring;
  offspring.reserve(static_cast<std::size_t>(p));
  std::vector<int> assigned(static_cast<std::size_t>(p));
  // Index into events_ for each crossover child, -1 otherwise; used to patch
  // the improved flag after evaluation.
  std::vector<std::ptrdiff_t> event_of(static_cast<std::size_t>(p), -1);

  for (int pair = 0; pair < p / 2; ++pair) {
    const auto& p1 = population_[static_cast<std::size_t>(perm[static_cast<std::size_t>(2 * pair)])];
    const auto& p2 =
        population_[static_cast<std::size_t>(perm[static_cast<std::size_t>(2 * pair + 1)])];
    MatingOutcome m = assortative_mating(p1, p2, cfg_, p_gene_, mate_rng);
    for (int c = 0; c < 2; ++c) {
      const auto j = static_cast<std::size_t>(2 * pair + c);
      Candidate kid;
      kid.genome = std::move(m.child[c]);
      kid.record.factorial_costs.assign(static_cast<std::size_t>(task_count_), kUnevaluated);
      kid.birth_order = next_birth_++;
      assigned[j] = m.assigned_task[c];
      if (m.crossover) {
        event_of[j] = static_cast<std::ptrdiff_t>(events_.size());
        events_.push_back({g, p1.record.skill_factor, p2.record.skill_factor,
                           m.assigned_task[c], false});
      }
      offspring.push_back(std::move(kid));
    }
  }

  // Vertical cultural transmission: one evaluation per offspring, on its
  // single assigned task.
  std::vector<TaskEvaluator::Request> requests;
  requests.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j)
    requests.push_back({&offspring[static_cast<std::size_t>(j)].genome,
                        assigned[static_cast<std::size_t>(j)],
                        EvalSeed{g, static_cast<std::uint64_t>(j)}});
  std::vector<double> costs;
  evaluator_->evaluate_batch(requests, costs);
  for (int j = 0; j < p; ++j) {
    const auto ji = static_cast<std::size_t>(j);
    const int task = assigned[ji];
    offspring[ji].record.factorial_costs[static_cast<std::size_t>(task)] = costs[ji];
    note_best(task, costs[ji], offspring[ji].genome);
    if (event_of[ji] >= 0)
      events_[static_cast<std::size_t>(event_of[ji])].improved =
          costs[ji] < best_at_start[static_cast<std::size_t>(task)];
  }
  eval_count_ += p;

  std::vector<Candidate> merged = std::move(population_);
  merged.reserve(static_cast<std::size_t>(2 * p));
  for (auto& kid : offspring) merged.push_back(std::move(kid));
  rank_and_score(merged);
  const auto survivors = select_survivor_indices(merged, p);
  population_.clear();
  population_.reserve(static_cast<std::size_t>(p));
  for (int idx : survivors) population_.push_back(std::move(merged[static_cast<std::size_t>(idx)]));
  // Re-rank within the survivor population so stored ranks/fitness/skills are
  // consistent with the population the next generation will actually see.
  rank_and_score(population_);
  generation_ = g;
}

GenerationStats MfeaEngine::current_stats() const {
  return population_stats(population_, task_count_, generation_);
}

EngineSnapshot MfeaEngine::snapshot() const {
  EngineSnapshot s;
  s.generation = generation_;
  s.next_birth = next_birth_;
  s.population = population_;
  s.best_ever = best_ever_;
  s.events = events_;
  return s;
}

void MfeaEngine::restore(EngineSnapshot state) {
  if (static_cast<int>(state.population.size()) != cfg_.population_size)
    throw UsageError("MfeaEngine::restore: population size mismatch");
  population_ = std::move(state.population);
  best_ever_ = std::move(state.best_ever);
  events_ = std::move(state.events);
  next_birth_ = state.next_birth;
  generation_ = state.generation;
  eval_count_ = static_cast<long long>(cfg_.population_size) * task_count_ +
                static_cast<long long>(generation_) * cfg_.population_size;
  rank_and_score(population_);
  initialized_ = true;
}

MfeaResult run_mfea(const MfeaConfig& cfg, int genome_dim, TaskEvaluator& evaluator) {
  MfeaEngine engine(cfg, genome_dim, evaluator);
  engine.initialize();
  MfeaResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.generations));
  for (int g = 0; g < cfg.generations; ++g) {
    engine.step_generation();
    result.history.push_back(engine.current_stats());
  }
  result.best = engine.best_ever();
  result.events = engine.events();
  result.total_evaluations = engine.total_evaluations();
  return result;
}

}  // namespace evomt
