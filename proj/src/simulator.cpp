#include "blockwise/simulator.hpp"

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

namespace {

// Deterministic u in [-1, 1] from the trial identity. Repeated calls with the
// same (seed, dataset, partitioning) must agree exactly.
double noise_draw(const CostModelParams& params, const DatasetDescriptor& d,
                  const Partitioning& part) {
  std::uint64_t h = params.seed;
  h = hash_combine(h, d.rows);
  h = hash_combine(h, d.cols);
  h = hash_combine(h, d.size_bytes);
  h = hash_combine(h, d.element_bytes);
  h = hash_combine(h, part.p_r);
  h = hash_combine(h, part.p_c);
  // 53 random bits -> [0, 1) -> [-1, 1]
  double unit = static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

}  // namespace

TrialTime simulate_execution(const CostModelParams& params, const DatasetDescriptor& d,
                             const EnvironmentDescriptor& e, const Partitioning& part) {
  if (params.gamma <= 0.0 || params.delta <= 0.0)
    throw InvalidField("cost_model", "gamma and delta must be positive");

  std::uint64_t block_rows = ceil_div(d.rows, part.p_r);
  std::uint64_t block_cols = ceil_div(d.cols, part.p_c);

  double block_bytes = static_cast<double>(block_rows) * static_cast<double>(block_cols) *
                       d.element_bytes;
  double per_core_budget = static_cast<double>(e.ram_per_node_bytes) / e.cores_per_node;
  if (block_bytes > per_core_budget) return TrialTime::failed();

  double blocks = static_cast<double>(part.total_blocks());
  double waves = static_cast<double>(ceil_div(part.total_blocks(), e.total_cores()));
  double t = params.t0 +
             waves * params.gamma * static_cast<double>(block_rows) *
                 static_cast<double>(block_cols) +
             params.delta * blocks;
  if (params.noise_rel > 0.0)
    t *= 1.0 + noise_draw(params, d, part) * params.noise_rel;
  return TrialTime::of_seconds(t);
}

const CostModelParams& CostModelTable::for_algorithm(const std::string& name) const {
  auto it = per_algorithm.find(name);
  return it == per_algorithm.end() ? fallback : it->second;
}

CostModelTable default_cost_models(std::uint64_t seed) {
  auto derived = [seed](const char* name) { return splitmix64(seed ^ hash_string(name)); };
  CostModelTable table;
  table.fallback = CostModelParams{0.1, 1.0e-8, 0.005, 0.0, derived("fallback")};
  table.per_algorithm = {
      {"kmeans", CostModelParams{0.10, 8.0e-9, 0.004, 0.0, derived("kmeans")}},
      {"random_forest", CostModelParams{0.20, 2.4e-8, 0.006, 0.0, derived("random_forest")}},
      {"svm", CostModelParams{0.15, 4.0e-8, 0.005, 0.0, derived("svm")}},
      {"gmm", CostModelParams{0.12, 1.6e-8, 0.005, 0.0, derived("gmm")}},
      {"pca", CostModelParams{0.10, 1.2e-8, 0.003, 0.0, derived("pca")}},
  };
  return table;
}

Executor simulator_executor(CostModelTable table) {
  return [table = std::move(table)](const DatasetDescriptor& d, const AlgorithmDescriptor& a,
                                    const EnvironmentDescriptor& e, const Partitioning& part) {
    return simulate_execution(table.for_algorithm(a.name), d, e, part);
  };
}

}  // namespace blockwise
