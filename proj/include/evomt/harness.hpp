#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evomt/evaluator.hpp"
#include "evomt/mfea.hpp"

namespace evomt {

// One experiment: a set of environment-preset tasks evolved jointly for a
// number of independent runs. Loaded from JSON; unknown keys are rejected.
struct ExperimentConfig {
  std::string name;
  std::vector<std::string> task_presets;  // e.g. {"cartpole:B"} or 9 for RQ3
  MfeaConfig mfea;                        // mfea.seed is the base seed
  int runs = 5;
  std::string output_dir;
  double w_max = 4.0;
  int shared_layers = 3;                   // L_sh
  std::vector<int> hidden_layers = {16, 16, 8};
  int n_fitness_episodes = 50;
  int n_test_episodes = 250;
  SeedPolicy episode_seed_policy = SeedPolicy::FixedSet;
  int torque_bins = 5;                     // pendulum action discretization
  int checkpoint_every = 10;               // generations; 0 disables mid-run checkpoints
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& json_text, const std::string& origin);

// Canonical JSON echo (defaults materialized, stable key order) and its
// FNV-1a hash; both go into manifest.json and checkpoints.
std::string config_to_canonical_json(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Tasks + unified space implied by a config.
struct ProblemSetup {
  std::vector<TaskSpec> tasks;
  PartitionMap map;
};
ProblemSetup build_problem(const ExperimentConfig& cfg);

// K x K effective-crossover tally: donor = skill of the parent the offspring
// was NOT assigned to (equal to the assignee for same-skill matings).
struct TransferCell {
  long long improved = 0;
  long long total = 0;
};

struct TransferMatrix {
  int task_count = 0;
  std::vector<TransferCell> cells;  // row-major, donor * K + assignee
  const TransferCell& at(int donor, int assignee) const {
    return cells[static_cast<std::size_t>(donor) * static_cast<std::size_t>(task_count) +
                 static_cast<std::size_t>(assignee)];
  }
  TransferCell& at(int donor, int assignee) {
    return cells[static_cast<std::size_t>(donor) * static_cast<std::size_t>(task_count) +
                 static_cast<std::size_t>(assignee)];
  }
};

TransferMatrix compute_transfer_matrix(const std::vector<CrossoverEvent>& events,
                                       int task_count);

struct RunOptions {
  int parallel = 1;                  // evaluation worker count
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  std::string output_override;       // empty keeps the config's output_dir
  int abort_after_generations = -1;  // test hook: checkpoint and stop mid-run
};

struct TaskTestResult {
  int task = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
};

struct ExperimentResult {
  std::string output_dir;
  std::vector<std::string> task_names;
  std::vector<std::vector<TaskTestResult>> per_run_tests;  // [run][task]
  bool completed = true;  // false when stopped by abort_after_generations
};

// Runs every configured run to completion, writing all artifacts under the
// output directory (curves, events, transfer matrices, test results, summary,
// best genomes, manifest, checkpoints).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options);

// Continues an interrupted experiment from its output directory (or a
// checkpoint file inside it); completed artifacts are byte-identical to an
// uninterrupted run.
ExperimentResult resume_experiment(const std::string& checkpoint_or_dir,
                                   const RunOptions& options);

// Long-format and across-run aggregate curve files, rebuilt from the per-run
// curve artifacts in the directory.
void emit_plot_data(const std::string& output_dir, int runs,
                    const std::vector<std::string>& task_names);

// Events CSV round-trip used by the transfer-matrix CLI command.
std::vector<CrossoverEvent> read_events_csv(const std::string& path);
void write_transfer_csv(const std::string& path, const TransferMatrix& matrix,
                        const std::vector<std::string>& task_names);

}  // namespace evomt
