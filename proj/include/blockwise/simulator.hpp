#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "blockwise/domain.hpp"

namespace blockwise {

/// Wave-model cost parameters. With B = p_r * p_c blocks on C total cores,
///
///   t = t0 + ceil(B / C) * gamma * block_rows * block_cols + delta * B
///
/// then scaled by (1 + u * noise_rel), u uniform in [-1, 1] drawn
/// deterministically from (seed, dataset, partitioning). A block larger than
/// ram_per_node / cores_per_node fails outright (FAILED, not an error).
struct CostModelParams {
  double t0 = 0.0;         // fixed startup seconds
  double gamma = 1e-8;     // seconds per element per wave
  double delta = 0.005;    // seconds per block (scheduling overhead)
  double noise_rel = 0.0;  // relative noise amplitude, 0 = exact
  std::uint64_t seed = 0;

  friend bool operator==(const CostModelParams&, const CostModelParams&) = default;
};

TrialTime simulate_execution(const CostModelParams& params, const DatasetDescriptor& d,
                             const EnvironmentDescriptor& e, const Partitioning& part);

/// Per-algorithm parameter table with a fallback for unlisted algorithms.
struct CostModelTable {
  std::map<std::string, CostModelParams> per_algorithm;
  CostModelParams fallback;

  const CostModelParams& for_algorithm(const std::string& name) const;
};

/// Built-in parameters for the stock algorithms (kmeans, random_forest, svm,
/// gmm, pca). The gamma ratios are rough compute-intensity guesses with no
/// external authority; override them in the config file for anything real.
CostModelTable default_cost_models(std::uint64_t seed);

using Executor = std::function<TrialTime(const DatasetDescriptor&, const AlgorithmDescriptor&,
                                         const EnvironmentDescriptor&, const Partitioning&)>;

Executor simulator_executor(CostModelTable table);

}  // namespace blockwise
