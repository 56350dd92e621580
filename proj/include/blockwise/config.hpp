#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "blockwise/log_ingest.hpp"
#include "blockwise/simulator.hpp"

namespace blockwise {

// Sectioned key=value config. '#' comments, unknown keys are rejected, an
// empty file is valid. CLI flags override config values override defaults.
//
//   seed = 42
//   strict = false
//   [paths]
//   log = runs.log
//   training_set = training.tsv
//   model = model.bwm
//   grids_dir = grids
//   [gridsearch]
//   step = 2
//   parallelism = 1
//   include_identity = false
//   [learner]
//   max_depth = 12
//   min_samples_leaf = 1
//   max_partitions_factor = 4
//   [cost_model.kmeans]
//   t0 = 0.1
//   gamma = 8e-9
//   delta = 0.004
//   noise_rel = 0
//   seed = 0            # 0 = derive from the top-level seed
struct Config {
  std::uint64_t seed = 42;
  ParseMode parse_mode = ParseMode::lenient;

  std::string log_path;
  std::string training_path;
  std::string model_path;
  std::string grids_dir = "grids";

  int step = 2;
  unsigned parallelism = 1;
  bool include_identity = false;

  std::uint32_t max_depth = 12;
  std::uint32_t min_samples_leaf = 1;
  std::uint32_t max_partitions_factor = 4;

  // Overrides stated in [cost_model.<algo>] sections; entries with seed 0
  // get a per-algorithm seed derived from the top-level one.
  std::map<std::string, CostModelParams> cost_model_overrides;

  /// Defaults merged with the per-algorithm overrides, seeds resolved.
  CostModelTable cost_models() const;

  static Config load(std::istream& in);                      // throws ConfigError
  static Config load_file(const std::filesystem::path& path);
};

}  // namespace blockwise
