#include "evomt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "evomt/csv.hpp"
#include "evomt/errors.hpp"
#include "evomt/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace evomt {

// ---------------------------------------------------------------------------
// CSV reader (counterpart of CsvWriter; handles quoted fields and CRLF)
// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
      rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

namespace {

const char* seed_policy_name(SeedPolicy p) {
  return p == SeedPolicy::FixedSet ? "fixed_set" : "per_call";
}

SeedPolicy seed_policy_from(const std::string& s, const std::string& where) {
  if (s == "fixed_set") return SeedPolicy::FixedSet;
  if (s == "per_call") return SeedPolicy::PerCall;
  throw ConfigError(where + ": episode_seed_policy must be 'fixed_set' or 'per_call'");
}

template <class T>
T get_field(const json& j, const std::string& key, const T& fallback,
            const std::string& origin) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(origin + ": $." + key + ": wrong type");
  }
}

void validate_config(const ExperimentConfig& cfg, const std::string& origin) {
  if (cfg.name.empty()) throw ConfigError(origin + ": $.name: must be non-empty");
  if (cfg.task_presets.empty()) throw ConfigError(origin + ": $.tasks: must be non-empty");
  for (std::size_t i = 0; i < cfg.task_presets.size(); ++i) {
    try {
      env_preset(cfg.task_presets[i]);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ": $.tasks[" + std::to_string(i) + "]: " + e.what());
    }
  }
  if (cfg.runs < 1) throw ConfigError(origin + ": $.runs: must be >= 1");
  if (cfg.output_dir.empty()) throw ConfigError(origin + ": $.output_dir: must be non-empty");
  if (cfg.w_max <= 0.0) throw ConfigError(origin + ": $.w_max: must be positive");
  if (cfg.hidden_layers.empty()) throw ConfigError(origin + ": $.hidden_layers: must be non-empty");
  for (int h : cfg.hidden_layers)
    if (h <= 0) throw ConfigError(origin + ": $.hidden_layers: sizes must be positive");
  if (cfg.shared_layers < 1 || cfg.shared_layers > static_cast<int>(cfg.hidden_layers.size()))
    throw ConfigError(origin + ": $.shared_layers: must satisfy 1 <= L_sh <= hidden layer count");
  if (cfg.n_fitness_episodes < 1)
    throw ConfigError(origin + ": $.n_fitness_episodes: must be >= 1");
  if (cfg.n_test_episodes < 1) throw ConfigError(origin + ": $.n_test_episodes: must be >= 1");
  if (cfg.checkpoint_every < 0)
    throw ConfigError(origin + ": $.checkpoint_every: must be >= 0");
  try {
    validate(cfg.mfea);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": JSON parse error: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top level must be a JSON object");

  static const std::vector<std::string> known = {
      "name",          "tasks",          "runs",           "base_seed",
      "output_dir",    "population_size", "generations",   "rmp",
      "sbx_eta",       "mutation_eta",   "mutation_prob_per_gene",
      "lambda",        "w_max",          "shared_layers",  "hidden_layers",
      "n_fitness_episodes", "n_test_episodes", "episode_seed_policy",
      "torque_bins",   "checkpoint_every"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(origin + ": unknown key '" + key + "'");
  }

  ExperimentConfig cfg;
  cfg.name = get_field<std::string>(j, "name", "", origin);
  cfg.task_presets = get_field<std::vector<std::string>>(j, "tasks", {}, origin);
  cfg.runs = get_field<int>(j, "runs", cfg.runs, origin);
  cfg.mfea.seed = get_field<std::uint64_t>(j, "base_seed", cfg.mfea.seed, origin);
  cfg.output_dir = get_field<std::string>(j, "output_dir", "", origin);
  cfg.mfea.population_size = get_field<int>(j, "population_size", cfg.mfea.population_size, origin);
  cfg.mfea.generations = get_field<int>(j, "generations", cfg.mfea.generations, origin);
  cfg.mfea.rmp = get_field<double>(j, "rmp", cfg.mfea.rmp, origin);
  cfg.mfea.sbx_eta = get_field<double>(j, "sbx_eta", cfg.mfea.sbx_eta, origin);
  cfg.mfea.mutation_eta = get_field<double>(j, "mutation_eta", cfg.mfea.mutation_eta, origin);
  cfg.mfea.mutation_prob_per_gene =
      get_field<double>(j, "mutation_prob_per_gene", cfg.mfea.mutation_prob_per_gene, origin);
  cfg.mfea.lambda = get_field<double>(j, "lambda", cfg.mfea.lambda, origin);
  cfg.w_max = get_field<double>(j, "w_max", cfg.w_max, origin);
  cfg.shared_layers = get_field<int>(j, "shared_layers", cfg.shared_layers, origin);
  cfg.hidden_layers = get_field<std::vector<int>>(j, "hidden_layers", cfg.hidden_layers, origin);
  cfg.n_fitness_episodes =
      get_field<int>(j, "n_fitness_episodes", cfg.n_fitness_episodes, origin);
  cfg.n_test_episodes = get_field<int>(j, "n_test_episodes", cfg.n_test_episodes, origin);
  cfg.episode_seed_policy = seed_policy_from(
      get_field<std::string>(j, "episode_seed_policy", "fixed_set", origin), origin);
  cfg.torque_bins = get_field<int>(j, "torque_bins", cfg.torque_bins, origin);
  cfg.checkpoint_every = get_field<int>(j, "checkpoint_every", cfg.checkpoint_every, origin);

  validate_config(cfg, origin);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_config_text(text, path);
}

namespace {

json config_to_json_object(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["tasks"] = cfg.task_presets;
  j["runs"] = cfg.runs;
  j["base_seed"] = cfg.mfea.seed;
  j["output_dir"] = cfg.output_dir;
  j["population_size"] = cfg.mfea.population_size;
  j["generations"] = cfg.mfea.generations;
  j["rmp"] = cfg.mfea.rmp;
  j["sbx_eta"] = cfg.mfea.sbx_eta;
  j["mutation_eta"] = cfg.mfea.mutation_eta;
  j["mutation_prob_per_gene"] = cfg.mfea.mutation_prob_per_gene;
  j["lambda"] = cfg.mfea.lambda;
  j["w_max"] = cfg.w_max;
  j["shared_layers"] = cfg.shared_layers;
  j["hidden_layers"] = cfg.hidden_layers;
  j["n_fitness_episodes"] = cfg.n_fitness_episodes;
  j["n_test_episodes"] = cfg.n_test_episodes;
  j["episode_seed_policy"] = seed_policy_name(cfg.episode_seed_policy);
  j["torque_bins"] = cfg.torque_bins;
  j["checkpoint_every"] = cfg.checkpoint_every;
  return j;
}

}  // namespace

std::string config_to_canonical_json(const ExperimentConfig& cfg) {
  return config_to_json_object(cfg).dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string s = config_to_canonical_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64-bit
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ProblemSetup build_problem(const ExperimentConfig& cfg) {
  ProblemSetup setup;
  std::vector<Architecture> archs;
  for (std::size_t k = 0; k < cfg.task_presets.size(); ++k) {
    EnvConfig env = env_preset(cfg.task_presets[k]);
    env.torque_bins = cfg.torque_bins;
    validate(env);
    Architecture arch;
    arch.layer_sizes.push_back(observation_dim(env));
    for (int h : cfg.hidden_layers) arch.layer_sizes.push_back(h);
    arch.layer_sizes.push_back(action_count(env));
    arch.activation = Architecture::Activation::ReLU;
    TaskSpec task;
    task.task_index = static_cast<int>(k);
    task.env_config = env;
    task.architecture = arch;
    task.n_fitness_episodes = cfg.n_fitness_episodes;
    task.n_test_episodes = cfg.n_test_episodes;
    task.episode_seed_policy = cfg.episode_seed_policy;
    validate(task);
    setup.tasks.push_back(std::move(task));
    archs.push_back(setup.tasks.back().architecture);
  }
  setup.map = build_partition_map(archs, cfg.shared_layers);
  return setup;
}

// ---------------------------------------------------------------------------
// Transfer matrix
// ---------------------------------------------------------------------------

TransferMatrix compute_transfer_matrix(const std::vector<CrossoverEvent>& events,
                                       int task_count) {
  TransferMatrix m;
  m.task_count = task_count;
  m.cells.assign(static_cast<std::size_t>(task_count) * static_cast<std::size_t>(task_count),
                 TransferCell{});
  for (const auto& e : events) {
    const int assignee = e.offspring_assigned_task;
    const int donor = assignee == e.parent_skill_a ? e.parent_skill_b : e.parent_skill_a;
    auto& cell = m.at(donor, assignee);
    ++cell.total;
    if (e.improved) ++cell.improved;
  }
  return m;
}

void write_transfer_csv(const std::string& path, const TransferMatrix& matrix,
                        const std::vector<std::string>& task_names) {
  CsvWriter w(path);
  w.row({"donor", "assignee", "improved", "total", "ratio"});
  for (int d = 0; d < matrix.task_count; ++d) {
    for (int a = 0; a < matrix.task_count; ++a) {
      const auto& cell = matrix.at(d, a);
      // Ratio left empty (null) for cells with no events.
      const std::string ratio =
          cell.total > 0
              ? format_double(static_cast<double>(cell.improved) / static_cast<double>(cell.total))
              : "";
      w.row({task_names[static_cast<std::size_t>(d)], task_names[static_cast<std::size_t>(a)],
             std::to_string(cell.improved), std::to_string(cell.total), ratio});
    }
  }
  w.close();
}

std::vector<CrossoverEvent> read_events_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw IoError("events CSV is empty: " + path);
  std::vector<CrossoverEvent> events;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5) throw IoError("events CSV row has wrong arity: " + path);
    CrossoverEvent e;
    e.generation = std::stoi(r[0]);
    e.parent_skill_a = std::stoi(r[1]);
    e.parent_skill_b = std::stoi(r[2]);
    e.offspring_assigned_task = std::stoi(r[3]);
    e.improved = r[4] == "1";
    events.push_back(e);
  }
  return events;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kCheckpointMagic = 0x45564F4D54434B50ULL;  // "EVOMTCKP"
constexpr std::uint32_t kCheckpointVersion = 1;

class BinWriter {
 public:
  explicit BinWriter(const std::string& path)
      : path_(path), f_(std::fopen(path.c_str(), "wb")) {
    if (!f_) throw IoError("cannot open for writing: " + path);
  }
  ~BinWriter() {
    if (f_) std::fclose(f_);
  }
  void close() {
    if (f_ && std::fclose(f_) != 0) throw IoError("close failed: " + path_);
    f_ = nullptr;
  }
  template <class T>
  void put(T v) {
    if (std::fwrite(&v, sizeof(T), 1, f_) != 1) throw IoError("write failed: " + path_);
  }
  void put_doubles(const double* p, std::size_t n) {
    if (n && std::fwrite(p, sizeof(double), n, f_) != n)
      throw IoError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::FILE* f_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path)
      : path_(path), f_(std::fopen(path.c_str(), "rb")) {
    if (!f_) throw IoError("cannot open: " + path);
  }
  ~BinReader() {
    if (f_) std::fclose(f_);
  }
  template <class T>
  T get() {
    T v;
    if (std::fread(&v, sizeof(T), 1, f_) != 1) throw IoError("truncated checkpoint: " + path_);
    return v;
  }
  void get_doubles(double* p, std::size_t n) {
    if (n && std::fread(p, sizeof(double), n, f_) != n)
      throw IoError("truncated checkpoint: " + path_);
  }

 private:
  std::string path_;
  std::FILE* f_;
};

struct RunCheckpoint {
  int run = 0;
  EngineSnapshot state;
  std::vector<GenerationStats> history;
};

void write_checkpoint_bin(const std::string& path, const RunCheckpoint& ckpt, int p, int k,
                          int d) {
  BinWriter w(path);
  w.put(kCheckpointMagic);
  w.put(kCheckpointVersion);
  w.put(static_cast<std::int32_t>(p));
  w.put(static_cast<std::int32_t>(k));
  w.put(static_cast<std::int32_t>(d));
  w.put(static_cast<std::int32_t>(ckpt.state.generation));
  w.put(static_cast<std::int64_t>(ckpt.state.next_birth));
  for (const auto& cand : ckpt.state.population) {
    w.put(static_cast<std::int64_t>(cand.birth_order));
    w.put_doubles(cand.record.factorial_costs.data(), static_cast<std::size_t>(k));
    w.put_doubles(cand.genome.data(), static_cast<std::size_t>(d));
  }
  for (const auto& best : ckpt.state.best_ever) {
    const bool present = !best.genome.empty();
    w.put(static_cast<std::uint8_t>(present ? 1 : 0));
    w.put(best.cost);
    if (present) w.put_doubles(best.genome.data(), static_cast<std::size_t>(d));
  }
  w.put(static_cast<std::uint64_t>(ckpt.state.events.size()));
  for (const auto& e : ckpt.state.events) {
    w.put(static_cast<std::int32_t>(e.generation));
    w.put(static_cast<std::int32_t>(e.parent_skill_a));
    w.put(static_cast<std::int32_t>(e.parent_skill_b));
    w.put(static_cast<std::int32_t>(e.offspring_assigned_task));
    w.put(static_cast<std::uint8_t>(e.improved ? 1 : 0));
  }
  w.put(static_cast<std::uint32_t>(ckpt.history.size()));
  for (const auto& stats : ckpt.history) {
    w.put(static_cast<std::int32_t>(stats.generation));
    for (int task = 0; task < k; ++task) {
      const auto t = static_cast<std::size_t>(task);
      w.put(stats.best_cost[t]);
      w.put(stats.mean_cost[t]);
      w.put(stats.std_cost[t]);
      w.put(static_cast<std::int32_t>(stats.evaluated[t]));
    }
  }
  w.close();
}

RunCheckpoint read_checkpoint_bin(const std::string& path, int p, int k, int d) {
  BinReader r(path);
  if (r.get<std::uint64_t>() != kCheckpointMagic)
    throw IoError("not a checkpoint file: " + path);
  if (r.get<std::uint32_t>() != kCheckpointVersion)
    throw IoError("unsupported checkpoint version: " + path);
  if (r.get<std::int32_t>() != p || r.get<std::int32_t>() != k || r.get<std::int32_t>() != d)
    throw IoError("checkpoint dimensions do not match the configuration: " + path);
  RunCheckpoint ckpt;
  ckpt.state.generation = r.get<std::int32_t>();
  ckpt.state.next_birth = r.get<std::int64_t>();
  ckpt.state.population.resize(static_cast<std::size_t>(p));
  for (auto& cand : ckpt.state.population) {
    cand.birth_order = r.get<std::int64_t>();
    cand.record.factorial_costs.resize(static_cast<std::size_t>(k));
    r.get_doubles(cand.record.factorial_costs.data(), static_cast<std::size_t>(k));
    cand.genome.resize(static_cast<std::size_t>(d));
    r.get_doubles(cand.genome.data(), static_cast<std::size_t>(d));
  }
  ckpt.state.best_ever.resize(static_cast<std::size_t>(k));
  for (auto& best : ckpt.state.best_ever) {
    const bool present = r.get<std::uint8_t>() != 0;
    best.cost = r.get<double>();
    if (present) {
      best.genome.resize(static_cast<std::size_t>(d));
      r.get_doubles(best.genome.data(), static_cast<std::size_t>(d));
    }
  }
  const auto n_events = r.get<std::uint64_t>();
  ckpt.state.events.resize(n_events);
  for (auto& e : ckpt.state.events) {
    e.generation = r.get<std::int32_t>();
    e.parent_skill_a = r.get<std::int32_t>();
    e.parent_skill_b = r.get<std::int32_t>();
    e.offspring_assigned_task = r.get<std::int32_t>();
    e.improved = r.get<std::uint8_t>() != 0;
  }
  const auto n_hist = r.get<std::uint32_t>();
  ckpt.history.resize(n_hist);
  for (auto& stats : ckpt.history) {
    stats.generation = r.get<std::int32_t>();
    stats.best_cost.resize(static_cast<std::size_t>(k));
    stats.mean_cost.resize(static_cast<std::size_t>(k));
    stats.std_cost.resize(static_cast<std::size_t>(k));
    stats.evaluated.resize(static_cast<std::size_t>(k));
    for (int task = 0; task < k; ++task) {
      const auto t = static_cast<std::size_t>(task);
      stats.best_cost[t] = r.get<double>();
      stats.mean_cost[t] = r.get<double>();
      stats.std_cost[t] = r.get<double>();
      stats.evaluated[t] = r.get<std::int32_t>();
    }
  }
  return ckpt;
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------

std::string run_tag(int run) { return "run" + std::to_string(run); }

void write_curves_csv(const std::string& path, const std::vector<GenerationStats>& history,
                      const std::vector<std::string>& task_names) {
  CsvWriter w(path);
  w.row({"generation", "task", "best_reward", "mean_reward", "std_reward"});
  for (const auto& stats : history) {
    for (std::size_t t = 0; t < task_names.size(); ++t) {
      // Costs are negated mean rewards; reporting flips the sign back.
      w.row({std::to_string(stats.generation), task_names[t],
             format_double(-stats.best_cost[t]), format_double(-stats.mean_cost[t]),
             format_double(stats.std_cost[t])});
    }
  }
  w.close();
}

void write_events_csv(const std::string& path, const std::vector<CrossoverEvent>& events) {
  CsvWriter w(path);
  w.row({"generation", "parent_skill_a", "parent_skill_b", "assigned_task", "improved"});
  for (const auto& e : events)
    w.row({std::to_string(e.generation), std::to_string(e.parent_skill_a),
           std::to_string(e.parent_skill_b), std::to_string(e.offspring_assigned_task),
           e.improved ? "1" : "0"});
  w.close();
}

void write_test_results_csv(const std::string& path,
                            const std::vector<std::vector<TaskTestResult>>& per_run,
                            const std::vector<std::string>& task_names) {
  CsvWriter w(path);
  w.row({"run", "task", "mean_reward", "std_reward"});
  for (std::size_t r = 0; r < per_run.size(); ++r)
    for (const auto& res : per_run[r])
      w.row({std::to_string(r + 1), task_names[static_cast<std::size_t>(res.task)],
             format_double(res.mean_reward), format_double(res.std_reward)});
  w.close();
}

void write_summary_csv(const std::string& path,
                       const std::vector<std::vector<TaskTestResult>>& per_run,
                       const std::vector<std::string>& task_names) {
  CsvWriter w(path);
  w.row({"task", "mean_test_reward", "std_test_reward"});
  const std::size_t n_runs = per_run.size();
  for (std::size_t t = 0; t < task_names.size(); ++t) {
    double sum = 0.0;
    for (const auto& run : per_run) sum += run[t].mean_reward;
    const double mean = sum / static_cast<double>(n_runs);
    double acc = 0.0;
    for (const auto& run : per_run) acc += (run[t].mean_reward - mean) * (run[t].mean_reward - mean);
    const double sd = std::sqrt(acc / static_cast<double>(n_runs));
    w.row({task_names[t], format_double(mean), format_double(sd)});
  }
  w.close();
}

}  // namespace

void emit_plot_data(const std::string& output_dir, int runs,
                    const std::vector<std::string>& task_names) {
  const std::size_t k = task_names.size();
  // curves[run][generation index][task] = (best, mean, std)
  struct Row {
    double best, mean, sd;
  };
  std::vector<std::vector<std::vector<Row>>> curves;
  int n_gens = -1;
  for (int r = 1; r <= runs; ++r) {
    const auto rows =
        read_csv(output_dir + "/curves_" + run_tag(r) + ".csv");
    if ((rows.size() - 1) % k != 0)
      throw IoError("curves file has unexpected row count for " + run_tag(r));
    const int gens = static_cast<int>((rows.size() - 1) / k);
    if (n_gens < 0) n_gens = gens;
    if (gens != n_gens) throw IoError("curves files disagree on generation count");
    std::vector<std::vector<Row>> per_gen(static_cast<std::size_t>(gens),
                                          std::vector<Row>(k));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto g = (i - 1) / k;
      const auto t = (i - 1) % k;
      per_gen[g][t] = {std::stod(rows[i][2]), std::stod(rows[i][3]), std::stod(rows[i][4])};
    }
    curves.push_back(std::move(per_gen));
  }

  {
    CsvWriter w(output_dir + "/curves_long.csv");
    w.row({"generation", "task", "run", "best_reward", "mean_reward", "std_reward"});
    for (int r = 0; r < runs; ++r)
      for (int g = 0; g < n_gens; ++g)
        for (std::size_t t = 0; t < k; ++t) {
          const auto& row = curves[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)][t];
          w.row({std::to_string(g + 1), task_names[t], std::to_string(r + 1),
                 format_double(row.best), format_double(row.mean), format_double(row.sd)});
        }
    w.close();
  }
  {
    CsvWriter w(output_dir + "/curves_agg.csv");
    w.row({"generation", "task", "best_reward_mean", "best_reward_std", "mean_reward_mean",
           "mean_reward_std"});
    for (int g = 0; g < n_gens; ++g)
      for (std::size_t t = 0; t < k; ++t) {
        double best_sum = 0.0, mean_sum = 0.0;
        for (int r = 0; r < runs; ++r) {
          best_sum += curves[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)][t].best;
          mean_sum += curves[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)][t].mean;
        }
        const double best_mean = best_sum / runs;
        const double mean_mean = mean_sum / runs;
        double best_acc = 0.0, mean_acc = 0.0;
        for (int r = 0; r < runs; ++r) {
          const auto& row = curves[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)][t];
          best_acc += (row.best - best_mean) * (row.best - best_mean);
          mean_acc += (row.mean - mean_mean) * (row.mean - mean_mean);
        }
        w.row({std::to_string(g + 1), task_names[t], format_double(best_mean),
               format_double(std::sqrt(best_acc / runs)), format_double(mean_mean),
               format_double(std::sqrt(mean_acc / runs))});
      }
    w.close();
  }
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

namespace {

struct HashFmt {
  static std::string hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

std::vector<std::uint64_t> run_seeds_for(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  for (int r = 1; r <= cfg.runs; ++r)
    seeds.push_back(derive_seed(cfg.mfea.seed, seed_stream::kRun, static_cast<std::uint64_t>(r)));
  return seeds;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
  if (!f) throw IoError("write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  try {
    return json::parse(std::string((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>()));
  } catch (const json::exception& e) {
    throw IoError(path + ": JSON parse error: " + e.what());
  }
}

void write_manifest(const std::string& dir, const ExperimentConfig& cfg,
                    const ProblemSetup& setup, int runs_completed,
                    const std::vector<long long>& observed_evals, const std::string& status) {
  const long long p = cfg.mfea.population_size;
  const long long k = static_cast<long long>(setup.tasks.size());
  const long long g = cfg.mfea.generations;
  json j;
  j["name"] = cfg.name;
  j["config"] = config_to_json_object(cfg);
  j["config_hash"] = HashFmt::hex(config_hash(cfg));
  j["base_seed"] = cfg.mfea.seed;
  j["run_seeds"] = run_seeds_for(cfg);
  j["unified_dim"] = setup.map.total_dim;
  json tasks = json::array();
  for (const auto& task : setup.tasks) {
    json t;
    t["index"] = task.task_index;
    t["preset"] = cfg.task_presets[static_cast<std::size_t>(task.task_index)];
    t["environment"] = env_name(task.env_config.env_id);
    t["max_steps"] = task.env_config.max_steps;
    switch (task.env_config.env_id) {
      case EnvId::Cartpole: t["pole_length"] = task.env_config.pole_length; break;
      case EnvId::Acrobot: t["joint_length"] = task.env_config.joint_length; break;
      case EnvId::Pendulum:
        t["max_speed"] = task.env_config.max_speed;
        t["max_torque"] = task.env_config.max_torque;
        t["torque_bins"] = task.env_config.torque_bins;
        break;
    }
    t["layer_sizes"] = task.architecture.layer_sizes;
    t["parameter_count"] = task.architecture.parameter_count();
    tasks.push_back(std::move(t));
  }
  j["tasks"] = std::move(tasks);
  j["evaluations"] = {{"initial_per_run", p * k},
                      {"offspring_per_run", g * p},
                      {"total_per_run", p * k + g * p},
                      {"observed_per_run", observed_evals}};
  j["runs_completed"] = runs_completed;
  j["status"] = status;
  write_json_file(dir + "/manifest.json", j);
}

void write_progress(const std::string& dir,
                    const std::vector<std::vector<TaskTestResult>>& per_run,
                    const std::vector<long long>& observed_evals) {
  json j;
  j["completed_runs"] = per_run.size();
  json tests = json::array();
  for (const auto& run : per_run) {
    json row = json::array();
    for (const auto& res : run)
      row.push_back({{"task", res.task},
                     {"mean_reward", res.mean_reward},
                     {"std_reward", res.std_reward}});
    tests.push_back(std::move(row));
  }
  j["tests"] = std::move(tests);
  j["observed_evaluations"] = observed_evals;
  write_json_file(dir + "/progress.json", j);
}

void write_run_checkpoint(const std::string& dir, const ExperimentConfig& cfg, int run,
                          std::uint64_t run_seed, const RunCheckpoint& ckpt, int k, int d) {
  const std::string base = dir + "/checkpoint_" + run_tag(run);
  write_checkpoint_bin(base + ".bin", ckpt, cfg.mfea.population_size, k, d);
  json j;
  j["run"] = run;
  j["generation"] = ckpt.state.generation;
  j["config_hash"] = HashFmt::hex(config_hash(cfg));
  j["run_seed"] = run_seed;
  j["rng"] = "counter-derived";
  j["bin"] = "checkpoint_" + run_tag(run) + ".bin";
  write_json_file(base + ".json", j);
}

void write_best_genomes(const std::string& dir, const ExperimentConfig& cfg,
                        const ProblemSetup& setup, int run,
                        const std::vector<TaskBest>& best,
                        const std::vector<TaskTestResult>& tests) {
  const std::string sub = dir + "/best_genomes";
  fs::create_directories(sub);
  const json map_json = json::parse(partition_map_to_json(setup.map));
  for (std::size_t t = 0; t < best.size(); ++t) {
    if (best[t].genome.empty()) continue;
    const std::string base = sub + "/" + run_tag(run) + "_task" + std::to_string(t);
    write_genome_file(base + ".f64", best[t].genome);
    json j;
    j["run"] = run;
    j["task_index"] = static_cast<int>(t);
    j["preset"] = cfg.task_presets[t];
    j["w_max"] = cfg.w_max;
    j["cost"] = best[t].cost;
    j["test_mean_reward"] = tests[t].mean_reward;
    j["test_std_reward"] = tests[t].std_reward;
    j["genome_length"] = setup.map.total_dim;
    j["format"] = "float64-le";
    j["partition_map"] = map_json;
    write_json_file(base + ".json", j);
  }
}

}  // namespace

static ExperimentResult execute_runs(const ExperimentConfig& cfg, const RunOptions& options,
                                     int start_run, std::optional<RunCheckpoint> restore,
                                     std::vector<std::vector<TaskTestResult>> done_tests,
                                     std::vector<long long> observed_evals) {
  const ProblemSetup setup = build_problem(cfg);
  const std::string dir = cfg.output_dir;
  const int k = static_cast<int>(setup.tasks.size());
  const int d = setup.map.total_dim;
  const int total_gens = cfg.mfea.generations;
  const auto seeds = run_seeds_for(cfg);

  fs::create_directories(dir);
  write_manifest(dir, cfg, setup, static_cast<int>(done_tests.size()), observed_evals,
                 "in_progress");

  ExperimentResult result;
  result.output_dir = dir;
  result.task_names = cfg.task_presets;
  result.per_run_tests = std::move(done_tests);

  for (int run = start_run; run <= cfg.runs; ++run) {
    const std::uint64_t run_seed = seeds[static_cast<std::size_t>(run - 1)];
    RolloutEvaluator evaluator(setup.tasks, setup.map, cfg.w_max, run_seed);
    evaluator.parallel = options.parallel;
    MfeaConfig mfea_cfg = cfg.mfea;
    mfea_cfg.seed = run_seed;
    MfeaEngine engine(mfea_cfg, d, evaluator);

    std::vector<GenerationStats> history;
    if (run == start_run && restore) {
      history = std::move(restore->history);
      engine.restore(std::move(restore->state));
      restore.reset();
    } else {
      engine.initialize();
    }

    auto checkpoint_now = [&]() {
      RunCheckpoint ckpt;
      ckpt.run = run;
      ckpt.state = engine.snapshot();
      ckpt.history = history;
      write_run_checkpoint(dir, cfg, run, run_seed, ckpt, k, d);
      write_curves_csv(dir + "/curves_" + run_tag(run) + ".csv", history, cfg.task_presets);
      write_events_csv(dir + "/events_" + run_tag(run) + ".csv", engine.events());
    };

    for (int g = engine.generation() + 1; g <= total_gens; ++g) {
      engine.step_generation();
      history.push_back(engine.current_stats());
      const bool boundary =
          g == total_gens || (cfg.checkpoint_every > 0 && g % cfg.checkpoint_every == 0);
      const bool abort_here = options.abort_after_generations == g && g < total_gens;
      if (boundary || abort_here) checkpoint_now();
      if (abort_here) {
        result.completed = false;
        return result;
      }
    }
    if (total_gens == 0) checkpoint_now();  // degenerate budget still leaves artifacts

    // Held-out testing of the best-ever genome per task, fresh seed stream.
    std::vector<TaskTestResult> tests;
    for (int task = 0; task < k; ++task) {
      const auto& best = engine.best_ever()[static_cast<std::size_t>(task)];
      const EvalReport report =
          test_model(best.genome, setup.tasks[static_cast<std::size_t>(task)], setup.map,
                     cfg.w_max, cfg.n_test_episodes,
                     derive_seed(run_seed, seed_stream::kTest, static_cast<std::uint64_t>(task)));
      tests.push_back({task, report.mean_reward, report.std_reward});
    }
    write_best_genomes(dir, cfg, setup, run, engine.best_ever(), tests);
    write_transfer_csv(dir + "/transfer_" + run_tag(run) + ".csv",
                       compute_transfer_matrix(engine.events(), k), cfg.task_presets);
    result.per_run_tests.push_back(std::move(tests));
    observed_evals.push_back(engine.total_evaluations());
    write_progress(dir, result.per_run_tests, observed_evals);
    write_test_results_csv(dir + "/test_results.csv", result.per_run_tests, cfg.task_presets);
  }

  write_summary_csv(dir + "/summary.csv", result.per_run_tests, cfg.task_presets);
  emit_plot_data(dir, cfg.runs, cfg.task_presets);
  write_manifest(dir, cfg, setup, cfg.runs, observed_evals, "complete");
  result.completed = true;
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  ExperimentConfig eff = cfg;
  if (options.has_seed_override) eff.mfea.seed = options.seed_override;
  if (!options.output_override.empty()) eff.output_dir = options.output_override;
  return execute_runs(eff, options, 1, std::nullopt, {}, {});
}

ExperimentResult resume_experiment(const std::string& checkpoint_or_dir,
                                   const RunOptions& options) {
  if (options.has_seed_override)
    throw UsageError("resume: --seed cannot be overridden mid-experiment");
  fs::path path(checkpoint_or_dir);
  if (!fs::exists(path)) throw IoError("no such file or directory: " + checkpoint_or_dir);
  const fs::path dir = fs::is_directory(path) ? path : path.parent_path();

  const json manifest = read_json_file((dir / "manifest.json").string());
  ExperimentConfig cfg =
      parse_config_text(manifest.at("config").dump(), (dir / "manifest.json").string());
  cfg.output_dir = dir.string();  // resume in place

  std::vector<std::vector<TaskTestResult>> done_tests;
  std::vector<long long> observed;
  const fs::path progress_path = dir / "progress.json";
  if (fs::exists(progress_path)) {
    const json progress = read_json_file(progress_path.string());
    for (const auto& run : progress.at("tests")) {
      std::vector<TaskTestResult> tests;
      for (const auto& t : run)
        tests.push_back({t.at("task").get<int>(), t.at("mean_reward").get<double>(),
                         t.at("std_reward").get<double>()});
      done_tests.push_back(std::move(tests));
    }
    observed = progress.at("observed_evaluations").get<std::vector<long long>>();
  }

  const int start_run = static_cast<int>(done_tests.size()) + 1;
  if (start_run > cfg.runs) {
    // Nothing left to do; rebuild the aggregate artifacts for good measure.
    const ProblemSetup setup = build_problem(cfg);
    write_summary_csv(cfg.output_dir + "/summary.csv", done_tests, cfg.task_presets);
    emit_plot_data(cfg.output_dir, cfg.runs, cfg.task_presets);
    write_manifest(cfg.output_dir, cfg, setup, cfg.runs, observed, "complete");
    ExperimentResult result;
    result.output_dir = cfg.output_dir;
    result.task_names = cfg.task_presets;
    result.per_run_tests = std::move(done_tests);
    result.completed = true;
    return result;
  }

  std::optional<RunCheckpoint> restore;
  const fs::path ckpt_json = dir / ("checkpoint_" + run_tag(start_run) + ".json");
  if (fs::exists(ckpt_json)) {
    const json meta = read_json_file(ckpt_json.string());
    if (meta.at("config_hash").get<std::string>() != HashFmt::hex(config_hash(cfg)))
      throw ConfigError("resume: checkpoint config hash does not match the manifest");
    const ProblemSetup setup = build_problem(cfg);
    RunCheckpoint ckpt = read_checkpoint_bin((dir / meta.at("bin").get<std::string>()).string(),
                                             cfg.mfea.population_size,
                                             static_cast<int>(setup.tasks.size()),
                                             setup.map.total_dim);
    ckpt.run = start_run;
    restore = std::move(ckpt);
  }

  return execute_runs(cfg, options, start_run, std::move(restore), std::move(done_tests),
                      std::move(observed));
}

}  // namespace evomt
