#pragma once

#include <compare>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "blockwise/domain.hpp"

namespace blockwise {

/// Exact fingerprint of a <dataset, algorithm, environment> configuration.
/// Equality is field-wise after normalization; no fuzzy matching. Member
/// order doubles as the canonical sort order of training sets.
struct ConfigurationKey {
  std::string algorithm;  // lowercase
  TaskKind task_kind = TaskKind::other;
  RunMode mode = RunMode::train;
  std::uint64_t rows = 1;
  std::uint64_t cols = 1;
  std::uint64_t size_bytes = 0;
  std::uint32_t nodes = 1;
  std::uint32_t cores_per_node = 1;
  std::uint64_t ram_per_node_bytes = 1;

  std::uint64_t total_cores() const {
    return static_cast<std::uint64_t>(nodes) * cores_per_node;
  }

  friend bool operator==(const ConfigurationKey&, const ConfigurationKey&) = default;
  friend auto operator<=>(const ConfigurationKey&, const ConfigurationKey&) = default;
};

ConfigurationKey key_of(const ExecutionRecord& rec);
ConfigurationKey make_key(const DatasetDescriptor& d, const AlgorithmDescriptor& a,
                          const EnvironmentDescriptor& e);

DatasetDescriptor dataset_of(const ConfigurationKey& key);
AlgorithmDescriptor algorithm_of(const ConfigurationKey& key);
EnvironmentDescriptor environment_of(const ConfigurationKey& key);

/// One row of the training set: a configuration labeled with the
/// minimum-time partitioning observed for it.
struct TrainingExample {
  ConfigurationKey key;
  Partitioning best;
  double best_time = 0.0;  // finite, > 0

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// Total order on (time, partitioning) trials. A finite time always beats
/// FAILED; equal times prefer fewer total blocks, then smaller p_r, then
/// smaller p_c. Shared by extraction and grid-search argmin.
bool better_trial(TrialTime ta, const Partitioning& pa, TrialTime tb, const Partitioning& pb);

struct ExtractionResult {
  std::vector<TrainingExample> examples;  // canonically sorted by key
  std::size_t dropped_groups = 0;         // groups whose every record FAILED
};

ExtractionResult extract_training_set(std::span<const ExecutionRecord> records);

// Training set persistence, one example per line:
//   v1 <algo> <task_kind> <mode> <rows> <cols> <size_bytes> <nodes>
//      <cores_per_node> <ram_per_node_bytes> <p_r*> <p_c*> <best_time>
std::string serialize_example(const TrainingExample& ex);
TrainingExample parse_example(std::string_view line, std::size_t line_no = 0);
void write_training_set(std::ostream& out, std::span<const TrainingExample> examples);
std::vector<TrainingExample> read_training_set(std::istream& in);

}  // namespace blockwise
