#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blockwise/extraction.hpp"

namespace blockwise {

/// Sorted list of categories observed at fit time. Unseen values map to the
/// reserved UNKNOWN code, one past the last observed category.
struct CategoricalVocab {
  static constexpr const char* kUnknown = "UNKNOWN";

  std::vector<std::string> categories;  // sorted, observed values only

  int unknown_code() const { return static_cast<int>(categories.size()); }
  int code_of(std::string_view value) const;

  friend bool operator==(const CategoricalVocab&, const CategoricalVocab&) = default;
};

enum class FeatureKind { numeric, categorical };

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  CategoricalVocab vocab;  // categorical features only

  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

/// Fixed-order feature encoding of a ConfigurationKey: the seven numeric
/// descriptors (rows, cols, size_bytes, nodes, cores_per_node, total_cores,
/// ram_per_node_bytes) then three categoricals (algorithm, task_kind, mode).
/// The chained stage appends one extra slot carrying DT_r's predicted p_r.
/// Also records the training row/col ranges for the advisor's extrapolation
/// warnings.
struct FeatureSchema {
  std::vector<FeatureDescriptor> features;
  std::uint64_t rows_min = 0, rows_max = 0;
  std::uint64_t cols_min = 0, cols_max = 0;

  static FeatureSchema fit(std::span<const TrainingExample> examples);

  std::size_t arity() const { return features.size(); }
  std::vector<double> encode(const ConfigurationKey& key) const;
  std::vector<FeatureKind> kinds() const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

/// Gini(S) = 1 - sum_c (n_c/|S|)^2. Zero for a pure set, 0.5 for a balanced
/// binary one.
double gini_impurity(std::span<const std::size_t> class_counts);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  bool categorical = false;   // equality test instead of <= threshold
  double threshold = 0.0;     // numeric threshold, or category code
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint64_t label = 0;  // leaf: majority partition count
  std::vector<std::pair<std::uint64_t, std::size_t>> histogram;  // leaf: (label, count)

  bool is_leaf() const { return feature < 0; }
};

struct TreeHyper {
  std::uint32_t max_depth = 12;  // 0 = unlimited
  std::uint32_t min_samples_leaf = 1;

  friend bool operator==(const TreeHyper&, const TreeHyper&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t input_arity = 0;

  bool fitted() const { return !nodes.empty(); }
  std::uint64_t predict(std::span<const double> row) const;
  std::size_t depth() const;  // longest root-to-leaf test count
};

/// Greedy top-down CART induction minimizing weighted Gini. Numeric splits
/// test midpoints between consecutive distinct values, categorical splits are
/// one-vs-rest equality tests. Ties go to the lower feature index, then the
/// lower threshold/category code. Throws EmptyTrainingSet.
DecisionTree fit_tree(const std::vector<std::vector<double>>& rows,
                      std::span<const std::uint64_t> labels, std::span<const FeatureKind> kinds,
                      const TreeHyper& hyper = {});

struct ChainedHyper {
  TreeHyper tree;
  std::uint32_t max_partitions_factor = 4;  // max_partitions = factor * max total_cores

  friend bool operator==(const ChainedHyper&, const ChainedHyper&) = default;
};

/// DT_r -> DT_c cascade. DT_c consumes the base features plus DT_r's
/// prediction (not the ground-truth p_r*), so its input arity is one more
/// than DT_r's.
struct ChainedModel {
  FeatureSchema schema;
  DecisionTree tree_r;
  DecisionTree tree_c;
  std::vector<std::uint64_t> label_vocab_r;  // sorted admissible p_r values
  std::vector<std::uint64_t> label_vocab_c;
  int step = 2;
  std::uint64_t max_partitions = 0;
  ChainedHyper hyper;

  bool fitted() const { return tree_r.fitted() && tree_c.fitted(); }
};

ChainedModel fit_chained(std::span<const TrainingExample> examples, const ChainedHyper& hyper = {},
                         int step = 2);

/// Cascade prediction, clamped to the query's dataset dims.
Partitioning predict(const ChainedModel& model, const ConfigurationKey& key);
Partitioning predict_unclamped(const ChainedModel& model, const ConfigurationKey& key);

// Versioned text serialization; byte-identical for identical models.
std::string serialize_model(const ChainedModel& model);
ChainedModel deserialize_model(std::string_view bytes);  // VersionMismatch / CorruptModel

}  // namespace blockwise
