#include "blockwise/domain.hpp"

#include <algorithm>

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::classification: return "classification";
    case TaskKind::clustering: return "clustering";
    case TaskKind::dim_reduction: return "dim_reduction";
    case TaskKind::other: return "other";
  }
  return "other";
}

std::string to_string(RunMode m) {
  return m == RunMode::train ? "train" : "inference";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "classification") return TaskKind::classification;
  if (s == "clustering") return TaskKind::clustering;
  if (s == "dim_reduction") return TaskKind::dim_reduction;
  if (s == "other") return TaskKind::other;
  throw InvalidField("task_kind", "unknown value '" + std::string(s) + "'");
}

RunMode run_mode_from_string(std::string_view s) {
  if (s == "train") return RunMode::train;
  if (s == "inference") return RunMode::inference;
  throw InvalidField("mode", "unknown value '" + std::string(s) + "'");
}

TrialTime TrialTime::of_seconds(double s) {
  if (!std::isfinite(s) || s <= 0.0)
    throw InvalidField("time_seconds", "must be finite and positive, got " + format_double(s));
  TrialTime t;
  t.secs_ = s;
  return t;
}

BlockSize block_size(const DatasetDescriptor& d, const Partitioning& part) {
  if (part.p_r == 0 || part.p_c == 0)
    throw InvalidField("partitioning", "partition counts must be >= 1");
  if (part.p_r > d.rows || part.p_c > d.cols)
    throw PartitionExceedsDimension(
        "partitioning (" + std::to_string(part.p_r) + "," + std::to_string(part.p_c) +
        ") exceeds dataset dims (" + std::to_string(d.rows) + "," + std::to_string(d.cols) + ")");
  return BlockSize{ceil_div(d.rows, part.p_r), ceil_div(d.cols, part.p_c)};
}

Partitioning clamp_partitioning(const DatasetDescriptor& d, const Partitioning& part) {
  return Partitioning{std::min(part.p_r, d.rows), std::min(part.p_c, d.cols)};
}

}  // namespace blockwise
