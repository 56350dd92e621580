#pragma once

#include <string>
#include <vector>

#include "blockwise/learner.hpp"

namespace blockwise {

struct Recommendation {
  Partitioning partitioning;
  BlockSize block;
  std::uint64_t total_blocks = 1;
  std::vector<std::string> warnings;
};

/// Full estimation path: predict -> clamp -> block size, with advisory
/// warnings (unseen categories, dataset scale outside 10x of the training
/// range, block larger than per-core RAM, clamped prediction). Warnings never
/// fail the call; throws only ModelNotFitted.
Recommendation recommend(const ChainedModel& model, const DatasetDescriptor& d,
                         const AlgorithmDescriptor& a, const EnvironmentDescriptor& e);

/// One-line machine-readable form:
/// p_r=.. p_c=.. block_rows=.. block_cols=.. blocks=.. warnings=a;b
std::string machine_line(const Recommendation& rec);

}  // namespace blockwise
