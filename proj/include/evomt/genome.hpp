#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evomt/policy.hpp"

namespace evomt {

// Normalized genome in [0,1]^total_dim.
using UnifiedGenome = std::vector<double>;

struct SharedSlot {
  int offset = 0;
  int width = 0;  // max over tasks of that layer's parameter count
};

struct TaskSpan {
  int offset = 0;
  int length = 0;
};

// Layout of the unified search space: the first L_sh weight layers of every
// task map into shared per-layer slots (a task with a smaller layer reads the
// slot's prefix), and each task's remaining layers get private spans. Layout
// order is shared slots by layer, then task-specific spans by task then layer.
struct PartitionMap {
  int task_count = 0;
  int shared_layers = 0;  // L_sh
  int total_dim = 0;
  std::vector<SharedSlot> shared_slots;                // one per shared layer
  std::vector<std::vector<int>> shared_prefix;         // [task][shared layer] -> param count used
  std::vector<std::vector<TaskSpan>> specific_spans;   // [task][layer - L_sh]
  std::vector<Architecture> architectures;             // one per task
};

// Throws ConfigError unless 1 <= shared_layers < min_k (weight layers of k).
PartitionMap build_partition_map(const std::vector<Architecture>& architectures,
                                 int shared_layers);

// Decoded weight vector for one task: shared-slot prefixes then private spans,
// each normalized value v mapped affinely to (2v - 1) * w_max.
// Throws UsageError on a bad task index or genome length.
void decode(const UnifiedGenome& genome, int task_index, const PartitionMap& map,
            double w_max, std::vector<double>& out);

std::vector<double> decode(const UnifiedGenome& genome, int task_index,
                           const PartitionMap& map, double w_max = 4.0);

// i.i.d. uniform [0,1] genome, deterministic per seed.
UnifiedGenome random_genome(const PartitionMap& map, std::uint64_t seed);

// Flat little-endian float64 serialization (the checkpoint / best-genome wire
// format). Readers get the length from the file size.
void write_genome_file(const std::string& path, const UnifiedGenome& genome);
UnifiedGenome read_genome_file(const std::string& path);

// JSON sidecar round-trip for PartitionMap (nlohmann dump / parse).
std::string partition_map_to_json(const PartitionMap& map);
PartitionMap partition_map_from_json(const std::string& json_text);

}  // namespace evomt
