#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace blockwise {

enum class TaskKind { classification, clustering, dim_reduction, other };
enum class RunMode { train, inference };

std::string to_string(TaskKind k);
std::string to_string(RunMode m);
TaskKind task_kind_from_string(std::string_view s);  // throws InvalidField
RunMode run_mode_from_string(std::string_view s);    // throws InvalidField

/// A dataset of `rows` x `cols` elements. `size_bytes` is the on-disk
/// footprint (0 = unknown). `element_bytes` defaults to 8 (double precision);
/// `element_bytes_known` records whether a log stated it explicitly, which
/// gates the size-consistency check in the ingest layer.
struct DatasetDescriptor {
  std::uint64_t rows = 1;
  std::uint64_t cols = 1;
  std::uint64_t size_bytes = 0;
  std::uint32_t element_bytes = 8;
  bool element_bytes_known = false;

  friend bool operator==(const DatasetDescriptor&, const DatasetDescriptor&) = default;
};

struct AlgorithmDescriptor {
  std::string name;  // nonempty, lowercase
  TaskKind task_kind = TaskKind::other;
  RunMode mode = RunMode::train;

  friend bool operator==(const AlgorithmDescriptor&, const AlgorithmDescriptor&) = default;
};

struct EnvironmentDescriptor {
  std::uint32_t nodes = 1;
  std::uint32_t cores_per_node = 1;
  std::uint64_t ram_per_node_bytes = 1;

  // Always derived, never trusted from input.
  std::uint64_t total_cores() const {
    return static_cast<std::uint64_t>(nodes) * cores_per_node;
  }

  friend bool operator==(const EnvironmentDescriptor&, const EnvironmentDescriptor&) = default;
};

/// Split counts along rows and columns.
struct Partitioning {
  std::uint64_t p_r = 1;
  std::uint64_t p_c = 1;

  std::uint64_t total_blocks() const { return p_r * p_c; }

  friend bool operator==(const Partitioning&, const Partitioning&) = default;
  friend auto operator<=>(const Partitioning&, const Partitioning&) = default;
};

struct BlockSize {
  std::uint64_t block_rows = 1;
  std::uint64_t block_cols = 1;

  friend bool operator==(const BlockSize&, const BlockSize&) = default;
};

/// A measured execution time. Failed runs (OOM and friends) are carried as
/// +infinity in memory and compare greater than every finite time; the
/// serialized form is the literal "FAILED".
class TrialTime {
 public:
  TrialTime() : secs_(std::numeric_limits<double>::infinity()) {}

  static TrialTime failed() { return TrialTime(); }
  static TrialTime of_seconds(double s);  // throws InvalidField unless finite and > 0

  bool is_failed() const { return !std::isfinite(secs_); }
  double seconds() const { return secs_; }  // +inf when failed

  friend bool operator==(const TrialTime& a, const TrialTime& b) { return a.secs_ == b.secs_; }
  friend auto operator<=>(const TrialTime& a, const TrialTime& b) { return a.secs_ <=> b.secs_; }

 private:
  double secs_;
};

/// One logged run: the tuple <dataset, algorithm, environment, partitioning, time>.
struct ExecutionRecord {
  DatasetDescriptor dataset;
  AlgorithmDescriptor algorithm;
  EnvironmentDescriptor environment;
  Partitioning partitioning;
  TrialTime time;
  std::string extras;  // opaque trailing fields, preserved on round trip

  friend bool operator==(const ExecutionRecord&, const ExecutionRecord&) = default;
};

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

/// Block size from a partitioning: ceil(rows/p_r) x ceil(cols/p_c). The last
/// block per axis may be smaller; every element belongs to exactly one block.
/// Throws PartitionExceedsDimension when p_r > rows or p_c > cols.
BlockSize block_size(const DatasetDescriptor& d, const Partitioning& part);

/// (min(p_r, rows), min(p_c, cols)). Idempotent, never throws.
Partitioning clamp_partitioning(const DatasetDescriptor& d, const Partitioning& part);

}  // namespace blockwise
