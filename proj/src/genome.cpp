#include "evomt/genome.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "evomt/errors.hpp"
#include "evomt/rng.hpp"

namespace evomt {

PartitionMap build_partition_map(const std::vector<Architecture>& architectures,
                                 int shared_layers) {
  if (architectures.empty())
    throw ConfigError("build_partition_map: need at least one architecture");
  int min_layers = architectures.front().n_weight_layers();
  for (const auto& arch : architectures) {
    validate(arch);
    min_layers = std::min(min_layers, arch.n_weight_layers());
  }
  if (shared_layers < 1 || shared_layers >= min_layers)
    throw ConfigError("build_partition_map: shared_layers must satisfy 1 <= L_sh < min task depth");

  PartitionMap map;
  map.task_count = static_cast<int>(architectures.size());
  map.shared_layers = shared_layers;
  map.architectures = architectures;

  int offset = 0;
  for (int l = 0; l < shared_layers; ++l) {
    int width = 0;
    for (const auto& arch : architectures) width = std::max(width, arch.layer_param_count(l));
    map.shared_slots.push_back({offset, width});
    offset += width;
  }
  map.shared_prefix.resize(static_cast<std::size_t>(map.task_count));
  map.specific_spans.resize(static_cast<std::size_t>(map.task_count));
  for (int k = 0; k < map.task_count; ++k) {
    const auto& arch = architectures[static_cast<std::size_t>(k)];
    for (int l = 0; l < shared_layers; ++l)
      map.shared_prefix[static_cast<std::size_t>(k)].push_back(arch.layer_param_count(l));
    for (int l = shared_layers; l < arch.n_weight_layers(); ++l) {
      const int len = arch.layer_param_count(l);
      map.specific_spans[static_cast<std::size_t>(k)].push_back({offset, len});
      offset += len;
    }
  }
  map.total_dim = offset;
  return map;
}

void decode(const UnifiedGenome& genome, int task_index, const PartitionMap& map,
            double w_max, std::vector<double>& out) {
  if (task_index < 0 || task_index >= map.task_count)
    throw UsageError("decode: task index out of range");
  if (static_cast<int>(genome.size()) != map.total_dim)
    throw UsageError("decode: genome length does not match the partition map");

  const auto k = static_cast<std::size_t>(task_index);
  out.clear();
  out.reserve(static_cast<std::size_t>(map.architectures[k].parameter_count()));
  for (int l = 0; l < map.shared_layers; ++l) {
    const auto& slot = map.shared_slots[static_cast<std::size_t>(l)];
    const int used = map.shared_prefix[k][static_cast<std::size_t>(l)];
    for (int i = 0; i < used; ++i)
      out.push_back((2.0 * genome[static_cast<std::size_t>(slot.offset + i)] - 1.0) * w_max);
  }
  for (const auto& span : map.specific_spans[k])
    for (int i = 0; i < span.length; ++i)
      out.push_back((2.0 * genome[static_cast<std::size_t>(span.offset + i)] - 1.0) * w_max);
}

std::vector<double> decode(const UnifiedGenome& genome, int task_index,
                           const PartitionMap& map, double w_max) {
  std::vector<double> out;
  decode(genome, task_index, map, w_max, out);
  return out;
}

UnifiedGenome random_genome(const PartitionMap& map, std::uint64_t seed) {
  Rng rng(seed);
  UnifiedGenome g(static_cast<std::size_t>(map.total_dim));
  for (double& v : g) v = rng.uniform();
  return g;
}

void write_genome_file(const std::string& path, const UnifiedGenome& genome) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  static_assert(sizeof(double) == 8);
  f.write(reinterpret_cast<const char*>(genome.data()),
          static_cast<std::streamsize>(genome.size() * sizeof(double)));
  if (!f) throw IoError("write failed: " + path);
}

UnifiedGenome read_genome_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("cannot open: " + path);
  const auto bytes = static_cast<std::size_t>(f.tellg());
  if (bytes % sizeof(double) != 0)
    throw IoError("genome file size is not a multiple of 8 bytes: " + path);
  UnifiedGenome g(bytes / sizeof(double));
  f.seekg(0);
  f.read(reinterpret_cast<char*>(g.data()), static_cast<std::streamsize>(bytes));
  if (!f) throw IoError("read failed: " + path);
  return g;
}

namespace {

nlohmann::json architecture_to_json(const Architecture& arch) {
  return {{"layer_sizes", arch.layer_sizes},
          {"activation", arch.activation == Architecture::Activation::ReLU ? "relu" : "tanh"}};
}

Architecture architecture_from_json(const nlohmann::json& j) {
  Architecture arch;
  arch.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  const std::string act = j.at("activation").get<std::string>();
  if (act == "relu") arch.activation = Architecture::Activation::ReLU;
  else if (act == "tanh") arch.activation = Architecture::Activation::Tanh;
  else throw ConfigError("unknown activation '" + act + "'");
  return arch;
}

}  // namespace

std::string partition_map_to_json(const PartitionMap& map) {
  nlohmann::json j;
  j["task_count"] = map.task_count;
  j["shared_layers"] = map.shared_layers;
  j["total_dim"] = map.total_dim;
  auto& slots = j["shared_slots"] = nlohmann::json::array();
  for (const auto& s : map.shared_slots) slots.push_back({{"offset", s.offset}, {"width", s.width}});
  j["shared_prefix"] = map.shared_prefix;
  auto& spans = j["specific_spans"] = nlohmann::json::array();
  for (const auto& task_spans : map.specific_spans) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& s : task_spans) row.push_back({{"offset", s.offset}, {"length", s.length}});
    spans.push_back(std::move(row));
  }
  auto& archs = j["architectures"] = nlohmann::json::array();
  for (const auto& a : map.architectures) archs.push_back(architecture_to_json(a));
  return j.dump(2);
}

PartitionMap partition_map_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("partition map JSON parse error: ") + e.what());
  }
  PartitionMap map;
  map.task_count = j.at("task_count").get<int>();
  map.shared_layers = j.at("shared_layers").get<int>();
  map.total_dim = j.at("total_dim").get<int>();
  for (const auto& s : j.at("shared_slots"))
    map.shared_slots.push_back({s.at("offset").get<int>(), s.at("width").get<int>()});
  map.shared_prefix = j.at("shared_prefix").get<std::vector<std::vector<int>>>();
  for (const auto& task_spans : j.at("specific_spans")) {
    std::vector<TaskSpan> row;
    for (const auto& s : task_spans)
      row.push_back({s.at("offset").get<int>(), s.at("length").get<int>()});
    map.specific_spans.push_back(std::move(row));
  }
  for (const auto& a : j.at("architectures"))
    map.architectures.push_back(architecture_from_json(a));
  return map;
}

}  // namespace evomt
