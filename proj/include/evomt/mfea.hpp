#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "evomt/genome.hpp"
#include "evomt/rng.hpp"

namespace evomt {

// Sentinel for "not evaluated on this task": ranks last in every comparison.
inline constexpr double kUnevaluated = std::numeric_limits<double>::infinity();

struct MfeaConfig {
  int population_size = 100;        // P, even and >= 4
  int generations = 60;             // G
  double rmp = 0.3;                 // random mating probability threshold
  double sbx_eta = 15.0;
  double mutation_eta = 20.0;
  double mutation_prob_per_gene = -1.0;  // < 0 means 1 / genome_dim
  double lambda = 0.0;  // constraint penalty weight; zero (all tasks unconstrained)
  std::uint64_t seed = 0;
};

// Throws ConfigError on invalid population size, rmp, or operator settings.
void validate(const MfeaConfig& cfg);

// Per-candidate multifactorial bookkeeping.
struct FactorialRecord {
  std::vector<double> factorial_costs;  // psi_k, kUnevaluated where not measured
  std::vector<int> factorial_ranks;     // r_k, 1-based
  double scalar_fitness = 0.0;          // phi = 1 / min_k r_k
  int skill_factor = -1;                // tau = argmin_k r_k, ties to lowest task
};

struct Candidate {
  UnifiedGenome genome;
  FactorialRecord record;
  long long birth_order = 0;  // global creation counter; survivor ties favor older
};

// Provenance of one crossover-produced offspring (two per crossover mating).
struct CrossoverEvent {
  int generation = 0;
  int parent_skill_a = 0;
  int parent_skill_b = 0;
  int offspring_assigned_task = 0;
  bool improved = false;  // beat the population's best cost on the assigned
                          // task, snapshotted at the start of its generation
};

// How fitness evaluations are keyed. The evaluator derives episode seeds from
// these coordinates plus its own run seed, so identical schedules produce
// identical results no matter how evaluations are distributed over threads.
struct EvalSeed {
  int generation = 0;
  std::uint64_t eval_index = 0;  // unique within the generation
};

class TaskEvaluator {
 public:
  struct Request {
    const UnifiedGenome* genome = nullptr;
    int task = 0;
    EvalSeed seed;
  };

  virtual ~TaskEvaluator() = default;
  virtual int task_count() const = 0;
  virtual double cost(const UnifiedGenome& genome, int task, const EvalSeed& seed) = 0;
  // Independent single-task evaluations; the base implementation is the serial
  // reference loop, subclasses may parallelize. out is written by index.
  virtual void evaluate_batch(const std::vector<Request>& requests, std::vector<double>& out);
};

// --- pure bookkeeping operations (unit-testable in isolation) ---

// Per task: ranks 1..P by ascending cost, ties broken by candidate index;
// kUnevaluated entries sort after every finite cost. Throws UsageError on an
// empty table.
std::vector<std::vector<int>> compute_factorial_ranks(
    const std::vector<std::vector<double>>& costs);

// Sets scalar_fitness and skill_factor from current ranks.
void update_scalar_fitness_and_skill(std::vector<FactorialRecord>& records);

// Indices of the top-P candidates by scalar fitness (descending), ties broken
// older-first then by index. Throws UsageError if fewer than P candidates.
std::vector<int> select_survivor_indices(const std::vector<Candidate>& merged, int p);

// Task an offspring is evaluated on (vertical cultural transmission):
// crossover children inherit a uniformly random parent's skill, mutation-only
// children their sole parent's.
int assign_evaluation_task(bool crossover_child, int parent_skill_a, int parent_skill_b,
                           Rng& rng);

struct MatingOutcome {
  UnifiedGenome child[2];
  int assigned_task[2] = {0, 0};
  bool crossover = false;
};

// Algorithm-2 assortative mating: crossover + mutation when skills agree or
// the rmp draw allows, otherwise each parent is mutated alone.
MatingOutcome assortative_mating(const Candidate& p1, const Candidate& p2,
                                 const MfeaConfig& cfg, double p_gene, Rng& rng);

// --- per-generation population statistics, in cost sign ---
struct GenerationStats {
  int generation = 0;
  std::vector<double> best_cost;   // per task, over evaluated candidates
  std::vector<double> mean_cost;
  std::vector<double> std_cost;    // population standard deviation
  std::vector<int> evaluated;      // how many candidates had the task measured
};

GenerationStats population_stats(const std::vector<Candidate>& population, int task_count,
                                 int generation);

struct TaskBest {
  double cost = kUnevaluated;
  UnifiedGenome genome;
};

// Resumable engine state: everything needed to continue a run bit-exactly.
struct EngineSnapshot {
  int generation = 0;
  long long next_birth = 0;
  std::vector<Candidate> population;
  std::vector<TaskBest> best_ever;
  std::vector<CrossoverEvent> events;
};

class MfeaEngine {
 public:
  MfeaEngine(const MfeaConfig& cfg, int genome_dim, TaskEvaluator& evaluator);

  // Random population, full evaluation on every task, initial skill factors.
  void initialize();
  // One generation: mating, offspring evaluation on assigned tasks, merge,
  // rank/fitness update, survivor selection.
  void step_generation();

  int generation() const { return generation_; }
  int task_count() const { return task_count_; }
  int genome_dim() const { return genome_dim_; }
  const MfeaConfig& config() const { return cfg_; }
  const std::vector<Candidate>& population() const { return population_; }
  const std::vector<CrossoverEvent>& events() const { return events_; }
  const std::vector<TaskBest>& best_ever() const { return best_ever_; }
  long long total_evaluations() const { return eval_count_; }
  double mutation_prob() const { return p_gene_; }

  GenerationStats current_stats() const;

  EngineSnapshot snapshot() const;
  void restore(EngineSnapshot state);

 private:
  void rank_and_score(std::vector<Candidate>& pop) const;
  void note_best(int task, double cost, const UnifiedGenome& genome);

  MfeaConfig cfg_;
  int genome_dim_;
  int task_count_;
  double p_gene_;
  TaskEvaluator* evaluator_;
  std::vector<Candidate> population_;
  std::vector<TaskBest> best_ever_;
  std::vector<CrossoverEvent> events_;
  long long next_birth_ = 0;
  long long eval_count_ = 0;
  int generation_ = 0;
  bool initialized_ = false;
};

struct MfeaResult {
  std::vector<TaskBest> best;             // per task, best-ever
  std::vector<GenerationStats> history;   // generations 1..G
  std::vector<CrossoverEvent> events;
  long long total_evaluations = 0;
};

// Full Algorithm-1 loop; deterministic per (cfg, evaluator).
MfeaResult run_mfea(const MfeaConfig& cfg, int genome_dim, TaskEvaluator& evaluator);

}  // namespace evomt
