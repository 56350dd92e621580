#include "blockwise/extraction.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

ConfigurationKey key_of(const ExecutionRecord& rec) {
  return make_key(rec.dataset, rec.algorithm, rec.environment);
}

ConfigurationKey make_key(const DatasetDescriptor& d, const AlgorithmDescriptor& a,
                          const EnvironmentDescriptor& e) {
  return ConfigurationKey{
      a.name, a.task_kind, a.mode,   d.rows,           d.cols, d.size_bytes,
      e.nodes, e.cores_per_node, e.ram_per_node_bytes,
  };
}

DatasetDescriptor dataset_of(const ConfigurationKey& key) {
  DatasetDescriptor d;
  d.rows = key.rows;
  d.cols = key.cols;
  d.size_bytes = key.size_bytes;
  return d;
}

AlgorithmDescriptor algorithm_of(const ConfigurationKey& key) {
  return AlgorithmDescriptor{key.algorithm, key.task_kind, key.mode};
}

EnvironmentDescriptor environment_of(const ConfigurationKey& key) {
  return EnvironmentDescriptor{key.nodes, key.cores_per_node, key.ram_per_node_bytes};
}

bool better_trial(TrialTime ta, const Partitioning& pa, TrialTime tb, const Partitioning& pb) {
  if (ta != tb) return ta < tb;  // FAILED is +inf, loses to any finite time
  if (pa.total_blocks() != pb.total_blocks()) return pa.total_blocks() < pb.total_blocks();
  if (pa.p_r != pb.p_r) return pa.p_r < pb.p_r;
  return pa.p_c < pb.p_c;
}

ExtractionResult extract_training_set(std::span<const ExecutionRecord> records) {
  // Dedup identical (partitioning, time) trials per key, then take the
  // minimum under the total trial order. std::map keeps keys canonically
  // sorted, which makes the output independent of the input order.
  std::map<ConfigurationKey, std::set<std::pair<Partitioning, double>>> groups;
  for (const ExecutionRecord& rec : records) {
    ConfigurationKey key = key_of(rec);
    auto& group = groups[key];
    if (!rec.time.is_failed())
      group.insert({rec.partitioning, rec.time.seconds()});
  }

  ExtractionResult result;
  for (auto& [key, trials] : groups) {
    if (trials.empty()) {
      ++result.dropped_groups;
      continue;
    }
    auto best = trials.begin();
    for (auto it = std::next(trials.begin()); it != trials.end(); ++it) {
      if (better_trial(TrialTime::of_seconds(it->second), it->first,
                       TrialTime::of_seconds(best->second), best->first))
        best = it;
    }
    result.examples.push_back(TrainingExample{key, best->first, best->second});
  }
  return result;
}

std::string serialize_example(const TrainingExample& ex) {
  std::string out = "v1";
  auto add = [&out](const std::string& s) {
    out += '\t';
    out += s;
  };
  add(ex.key.algorithm);
  add(to_string(ex.key.task_kind));
  add(to_string(ex.key.mode));
  add(std::to_string(ex.key.rows));
  add(std::to_string(ex.key.cols));
  add(std::to_string(ex.key.size_bytes));
  add(std::to_string(ex.key.nodes));
  add(std::to_string(ex.key.cores_per_node));
  add(std::to_string(ex.key.ram_per_node_bytes));
  add(std::to_string(ex.best.p_r));
  add(std::to_string(ex.best.p_c));
  add(format_double(ex.best_time));
  return out;
}

TrainingExample parse_example(std::string_view line, std::size_t line_no) {
  auto fields = split_tabs(line);
  if (fields.size() != 13)
    throw MalformedRecord(line_no, "expected 13 tab-separated fields, got " +
                                       std::to_string(fields.size()));
  if (fields[0] != "v1")
    throw MalformedRecord(line_no, "unknown format version '" + std::string(fields[0]) + "'");

  TrainingExample ex;
  ex.key.algorithm = lowercase(fields[1]);
  if (ex.key.algorithm.empty()) throw InvalidField("algo_name", "must be nonempty");
  ex.key.task_kind = task_kind_from_string(fields[2]);
  ex.key.mode = run_mode_from_string(fields[3]);
  ex.key.rows = parse_u64(fields[4], "rows", line_no);
  ex.key.cols = parse_u64(fields[5], "cols", line_no);
  ex.key.size_bytes = parse_u64(fields[6], "size_bytes", line_no);
  std::uint64_t nodes = parse_u64(fields[7], "nodes", line_no);
  std::uint64_t cores = parse_u64(fields[8], "cores_per_node", line_no);
  ex.key.ram_per_node_bytes = parse_u64(fields[9], "ram_per_node_bytes", line_no);
  ex.best.p_r = parse_u64(fields[10], "p_r", line_no);
  ex.best.p_c = parse_u64(fields[11], "p_c", line_no);
  ex.best_time = parse_double(fields[12], "best_time", line_no);

  if (ex.key.rows == 0 || ex.key.cols == 0) throw InvalidField("rows/cols", "must be >= 1");
  if (nodes == 0 || cores == 0) throw InvalidField("nodes/cores_per_node", "must be >= 1");
  ex.key.nodes = static_cast<std::uint32_t>(nodes);
  ex.key.cores_per_node = static_cast<std::uint32_t>(cores);
  if (ex.key.ram_per_node_bytes == 0) throw InvalidField("ram_per_node_bytes", "must be >= 1");
  if (ex.best.p_r == 0 || ex.best.p_c == 0) throw InvalidField("p_r/p_c", "must be >= 1");
  if (!(ex.best_time > 0.0) || !std::isfinite(ex.best_time))
    throw InvalidField("best_time", "must be finite and positive");
  return ex;
}

void write_training_set(std::ostream& out, std::span<const TrainingExample> examples) {
  for (const TrainingExample& ex : examples) out << serialize_example(ex) << '\n';
}

std::vector<TrainingExample> read_training_set(std::istream& in) {
  std::vector<TrainingExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    examples.push_back(parse_example(line, line_no));
  }
  return examples;
}

}  // namespace blockwise
