#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evomt/errors.hpp"
#include "evomt/evaluator.hpp"
#include "evomt/genome.hpp"
#include "evomt/harness.hpp"
#include "evomt/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void print_result(const evomt::ExperimentResult& result) {
  if (!result.completed) {
    std::printf("stopped early; checkpoint written under %s\n", result.output_dir.c_str());
    return;
  }
  std::printf("experiment complete: %s\n", result.output_dir.c_str());
  for (std::size_t r = 0; r < result.per_run_tests.size(); ++r)
    for (const auto& t : result.per_run_tests[r])
      std::printf("  run %zu  %-14s  test reward %10.4f +/- %.4f\n", r + 1,
                  result.task_names[static_cast<std::size_t>(t.task)].c_str(), t.mean_reward,
                  t.std_reward);
}

int cmd_run(const std::string& config_path, const evomt::RunOptions& options,
            int abort_after) {
  evomt::RunOptions opts = options;
  opts.abort_after_generations = abort_after;
  const evomt::ExperimentConfig cfg = evomt::load_config(config_path);
  print_result(evomt::run_experiment(cfg, opts));
  return 0;
}

int cmd_resume(const std::string& path, const evomt::RunOptions& options) {
  print_result(evomt::resume_experiment(path, options));
  return 0;
}

int cmd_test(const std::string& genome_path, std::string preset, int episodes,
             std::uint64_t seed) {
  const evomt::UnifiedGenome genome = evomt::read_genome_file(genome_path);

  // The .json sidecar written next to every best genome carries the partition
  // map, task index, and weight scale needed to decode the vector.
  fs::path sidecar(genome_path);
  sidecar.replace_extension(".json");
  if (!fs::exists(sidecar))
    throw evomt::UsageError("no sidecar found at " + sidecar.string() +
                            " (needed for the partition map)");
  std::ifstream f(sidecar);
  json meta = json::parse(std::string((std::istreambuf_iterator<char>(f)),
                                      std::istreambuf_iterator<char>()));
  const evomt::PartitionMap map =
      evomt::partition_map_from_json(meta.at("partition_map").dump());
  int task_index = meta.at("task_index").get<int>();
  const double w_max = meta.at("w_max").get<double>();
  if (preset.empty()) preset = meta.at("preset").get<std::string>();

  evomt::TaskSpec task;
  task.task_index = task_index;
  task.env_config = evomt::env_preset(preset);
  task.architecture = map.architectures[static_cast<std::size_t>(task_index)];
  task.n_test_episodes = episodes;
  evomt::validate(task);

  const evomt::EvalReport report =
      evomt::test_model(genome, task, map, w_max, episodes, seed);
  std::printf("%s: mean reward %.6f +/- %.6f over %d episodes\n", preset.c_str(),
              report.mean_reward, report.std_reward, report.episodes_used);
  return 0;
}

int cmd_transfer(const std::string& events_path, int task_count, const std::string& out) {
  const auto events = evomt::read_events_csv(events_path);
  if (task_count <= 0) {
    for (const auto& e : events)
      task_count = std::max({task_count, e.parent_skill_a + 1, e.parent_skill_b + 1,
                             e.offspring_assigned_task + 1});
    if (task_count <= 0)
      throw evomt::UsageError("no events in " + events_path + "; pass --tasks explicitly");
  }
  const evomt::TransferMatrix matrix = evomt::compute_transfer_matrix(events, task_count);

  std::printf("%-8s", "");
  for (int a = 0; a < task_count; ++a) std::printf("  to %-8d", a);
  std::printf("\n");
  for (int d = 0; d < task_count; ++d) {
    std::printf("from %-3d", d);
    for (int a = 0; a < task_count; ++a) {
      const auto& cell = matrix.at(d, a);
      if (cell.total > 0)
        std::printf("  %5lld/%-5lld", cell.improved, cell.total);
      else
        std::printf("  %11s", "-");
    }
    std::printf("\n");
  }

  if (!out.empty()) {
    std::vector<std::string> names;
    for (int i = 0; i < task_count; ++i) names.push_back("task" + std::to_string(i));
    evomt::write_transfer_csv(out, matrix, names);
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multitask neuroevolution over a unified weight space"};
  app.require_subcommand(1);

  evomt::RunOptions options;
  std::uint64_t seed_flag = 0;

  auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--parallel", options.parallel, "evaluation worker count")
        ->check(CLI::PositiveNumber);
  };

  // run
  std::string config_path;
  int abort_after = -1;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--seed", seed_flag, "override the config's base seed");
  run->add_option("--out", options.output_override, "override the config's output directory");
  run->add_option("--abort-after", abort_after,
                  "stop after this many generations of the current run (for resume testing)");
  add_shared(run);

  // resume
  std::string resume_path;
  auto* resume = app.add_subcommand("resume", "continue an interrupted experiment");
  resume->add_option("path", resume_path, "output directory or checkpoint file")->required();
  add_shared(resume);

  // test
  std::string genome_path, preset;
  int episodes = 250;
  std::uint64_t test_seed = 0;
  auto* test = app.add_subcommand("test", "evaluate a saved genome on an environment preset");
  test->add_option("genome", genome_path, "genome .f64 file (with .json sidecar)")->required();
  test->add_option("preset", preset, "environment preset (defaults to the sidecar's)");
  test->add_option("--episodes", episodes, "held-out episode count")->check(CLI::PositiveNumber);
  test->add_option("--seed", test_seed, "seed for the episode stream");

  // transfer-matrix
  std::string events_path, transfer_out;
  int task_count = 0;
  auto* transfer =
      app.add_subcommand("transfer-matrix", "tally a transfer matrix from an events CSV");
  transfer->add_option("events", events_path, "events_run*.csv file")->required();
  transfer->add_option("--tasks", task_count, "task count (default: inferred from events)");
  transfer->add_option("--out", transfer_out, "also write the matrix as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (run->count("--seed") > 0) {
        options.has_seed_override = true;
        options.seed_override = seed_flag;
      }
      return cmd_run(config_path, options, abort_after);
    }
    if (resume->parsed()) return cmd_resume(resume_path, options);
    if (test->parsed()) return cmd_test(genome_path, preset, episodes, test_seed);
    if (transfer->parsed()) return cmd_transfer(events_path, task_count, transfer_out);
  } catch (const evomt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const evomt::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const evomt::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
