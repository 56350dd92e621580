#include "blockwise/advisor.hpp"

#include <sstream>

namespace blockwise {

Recommendation recommend(const ChainedModel& model, const DatasetDescriptor& d,
                         const AlgorithmDescriptor& a, const EnvironmentDescriptor& e) {
  ConfigurationKey key = make_key(d, a, e);

  Recommendation rec;
  Partitioning raw = predict_unclamped(model, key);
  rec.partitioning = clamp_partitioning(d, raw);
  rec.block = block_size(d, rec.partitioning);
  rec.total_blocks = rec.partitioning.total_blocks();

  for (const FeatureDescriptor& f : model.schema.features) {
    if (f.kind != FeatureKind::categorical) continue;
    std::string value;
    if (f.name == "algorithm") value = key.algorithm;
    else if (f.name == "task_kind") value = to_string(key.task_kind);
    else if (f.name == "mode") value = to_string(key.mode);
    if (f.vocab.code_of(value) == f.vocab.unknown_code())
      rec.warnings.push_back("unknown_" + f.name + ":" + value);
  }

  // The model's estimates are advertised for datasets within an order of
  // magnitude of the training data.
  auto outside = [](std::uint64_t v, std::uint64_t lo, std::uint64_t hi) {
    return static_cast<double>(v) < static_cast<double>(lo) / 10.0 ||
           static_cast<double>(v) > static_cast<double>(hi) * 10.0;
  };
  if (outside(d.rows, model.schema.rows_min, model.schema.rows_max))
    rec.warnings.push_back("rows_outside_training_range");
  if (outside(d.cols, model.schema.cols_min, model.schema.cols_max))
    rec.warnings.push_back("cols_outside_training_range");

  if (rec.partitioning != raw) rec.warnings.push_back("partitioning_clamped");

  // Same memory rule as the simulator, surfaced as a warning only; policy
  // belongs to whoever integrates with a real runtime.
  double block_bytes = static_cast<double>(rec.block.block_rows) *
                       static_cast<double>(rec.block.block_cols) * d.element_bytes;
  if (block_bytes > static_cast<double>(e.ram_per_node_bytes) / e.cores_per_node)
    rec.warnings.push_back("block_exceeds_per_core_memory");

  return rec;
}

std::string machine_line(const Recommendation& rec) {
  std::ostringstream out;
  out << "p_r=" << rec.partitioning.p_r << " p_c=" << rec.partitioning.p_c
      << " block_rows=" << rec.block.block_rows << " block_cols=" << rec.block.block_cols
      << " blocks=" << rec.total_blocks << " warnings=";
  for (std::size_t n = 0; n < rec.warnings.size(); ++n) {
    if (n) out << ';';
    out << rec.warnings[n];
  }
  return out.str();
}

}  // namespace blockwise
