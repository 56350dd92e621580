#include <algorithm>
#include <map>
#include <random>

#include "blockwise/errors.hpp"
#include "blockwise/learner.hpp"
#include "doctest.h"

using namespace blockwise;

namespace {

ConfigurationKey key(const char* algo, TaskKind task, std::uint64_t rows, std::uint64_t cols,
                     std::uint64_t size_bytes = 0, std::uint32_t nodes = 4,
                     std::uint32_t cores = 16, std::uint64_t ram = 256000000000ULL) {
  ConfigurationKey k;
  k.algorithm = algo;
  k.task_kind = task;
  k.mode = RunMode::train;
  k.rows = rows;
  k.cols = cols;
  k.size_bytes = size_bytes;
  k.nodes = nodes;
  k.cores_per_node = cores;
  k.ram_per_node_bytes = ram;
  return k;
}

TrainingExample example(ConfigurationKey k, Partitioning best, double t = 1.0) {
  return TrainingExample{std::move(k), best, t};
}

// The three fixture training rows (labels are the published best
// partitionings; times are ours).
std::vector<TrainingExample> fixture_rows() {
  return {
      example(key("kmeans", TaskKind::clustering, 500000, 1000, 2390000000ULL), {32, 4}, 41.2),
      example(key("random_forest", TaskKind::classification, 1000, 500000, 2920000000ULL), {32, 8}, 77.0),
      example(key("svm", TaskKind::classification, 10000, 10000, 1100000000ULL), {16, 16}, 12.5),
  };
}

// Exhaustive split enumeration with an independent Gini implementation;
// returns the minimal achievable weighted score over all single splits.
double oracle_best_score(const std::vector<std::vector<double>>& rows,
                         const std::vector<std::uint64_t>& labels) {
  auto gini = [](const std::map<std::uint64_t, int>& counts, int total) {
    if (total == 0) return 0.0;
    double sq = 0;
    for (auto& [l, c] : counts) sq += (double(c) / total) * (double(c) / total);
    return 1.0 - sq;
  };
  double best = 1e18;
  for (std::size_t f = 0; f < rows[0].size(); ++f) {
    std::vector<double> values;
    for (const auto& r : rows) values.push_back(r[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      double thr = (values[v] + values[v + 1]) / 2;
      std::map<std::uint64_t, int> lc, rc;
      int nl = 0, nr = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][f] <= thr) { ++lc[labels[i]]; ++nl; }
        else { ++rc[labels[i]]; ++nr; }
      }
      double score = (nl * gini(lc, nl) + nr * gini(rc, nr)) / double(rows.size());
      best = std::min(best, score);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("gini anchors: pure set 0, balanced binary set 0.5") {
  std::vector<std::size_t> pure{7};
  std::vector<std::size_t> balanced{5, 5};
  std::vector<std::size_t> empty;
  CHECK(gini_impurity(pure) == 0.0);
  CHECK(gini_impurity(balanced) == 0.5);
  CHECK(gini_impurity(empty) == 0.0);
}

TEST_CASE("encode uses sorted-vocabulary codes with UNKNOWN last") {
  std::vector<TrainingExample> rows{
      example(key("gmm", TaskKind::clustering, 100, 10), {2, 2}),
      example(key("kmeans", TaskKind::clustering, 100, 10), {2, 2}),
      example(key("rf", TaskKind::classification, 100, 10), {2, 2}),
  };
  FeatureSchema schema = FeatureSchema::fit(rows);
  REQUIRE(schema.arity() == 10);

  // algorithm is feature 7; vocab sorted [gmm, kmeans, rf]
  CHECK(schema.features[7].name == "algorithm");
  CHECK(schema.features[7].vocab.categories == std::vector<std::string>{"gmm", "kmeans", "rf"});
  CHECK(schema.encode(key("kmeans", TaskKind::clustering, 100, 10))[7] == 1.0);
  CHECK(schema.encode(key("gmm", TaskKind::clustering, 100, 10))[7] == 0.0);
  // unseen algorithm maps to the UNKNOWN code, one past the vocabulary
  CHECK(schema.encode(key("dbscan", TaskKind::clustering, 100, 10))[7] == 3.0);
}

TEST_CASE("keys differing only in rows encode to vectors differing only at the rows slot") {
  std::vector<TrainingExample> rows{example(key("kmeans", TaskKind::clustering, 100, 10), {2, 2})};
  FeatureSchema schema = FeatureSchema::fit(rows);
  std::vector<double> a = schema.encode(key("kmeans", TaskKind::clustering, 100, 10));
  std::vector<double> b = schema.encode(key("kmeans", TaskKind::clustering, 4096, 10));
  REQUIRE(a.size() == b.size());
  CHECK(a[0] != b[0]);
  for (std::size_t n = 1; n < a.size(); ++n) CHECK(a[n] == b[n]);
}

TEST_CASE("fit_tree: identical labels give a single-leaf tree") {
  std::vector<std::vector<double>> rows{{1.0}, {5.0}, {9.0}};
  std::vector<std::uint64_t> labels{4, 4, 4};
  std::vector<FeatureKind> kinds{FeatureKind::numeric};
  DecisionTree tree = fit_tree(rows, labels, kinds);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].is_leaf());
  CHECK(tree.predict(std::vector<double>{123.0}) == 4);
}

TEST_CASE("fit_tree: 1-D midpoint split reaches the oracle minimum") {
  std::vector<std::vector<double>> rows{{1.0}, {2.0}, {3.0}, {4.0}};
  std::vector<std::uint64_t> labels{2, 2, 4, 4};
  std::vector<FeatureKind> kinds{FeatureKind::numeric};
  DecisionTree tree = fit_tree(rows, labels, kinds);
  REQUIRE_FALSE(tree.nodes[0].is_leaf());
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == 2.5);
  CHECK(oracle_best_score(rows, {labels.begin(), labels.end()}) == 0.0);
  CHECK(tree.predict(std::vector<double>{1.7}) == 2);
  CHECK(tree.predict(std::vector<double>{3.1}) == 4);
  // both children are pure leaves
  CHECK(tree.nodes.size() == 3);
}

TEST_CASE("fit_tree solves XOR at depth 2 and no stump can") {
  std::vector<std::vector<double>> rows{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<std::uint64_t> labels{2, 4, 4, 2};
  std::vector<FeatureKind> kinds{FeatureKind::numeric, FeatureKind::numeric};

  DecisionTree tree = fit_tree(rows, labels, kinds);
  int correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    correct += tree.predict(rows[i]) == labels[i];
  CHECK(correct == 4);
  CHECK(tree.depth() == 2);

  // brute force: every depth-1 tree (any feature, any threshold, any leaf
  // labeling) misclassifies at least one row
  for (std::size_t f = 0; f < 2; ++f) {
    double thr = 0.5;
    for (std::uint64_t left_label : {2, 4})
      for (std::uint64_t right_label : {2, 4}) {
        int stump_correct = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          std::uint64_t pred = rows[i][f] <= thr ? left_label : right_label;
          stump_correct += pred == labels[i];
        }
        CHECK(stump_correct < 4);
      }
  }

  TreeHyper capped;
  capped.max_depth = 1;
  DecisionTree stump = fit_tree(rows, labels, kinds, capped);
  CHECK(stump.depth() <= 1);
  int stump_correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    stump_correct += stump.predict(rows[i]) == labels[i];
  CHECK(stump_correct < 4);
}

TEST_CASE("categorical splits are one-vs-rest equality tests") {
  // feature 0 is a category code; class 4 sits exactly on code 1
  std::vector<std::vector<double>> rows{{0}, {1}, {2}, {1}};
  std::vector<std::uint64_t> labels{2, 4, 2, 4};
  std::vector<FeatureKind> kinds{FeatureKind::categorical};
  DecisionTree tree = fit_tree(rows, labels, kinds);
  REQUIRE_FALSE(tree.nodes[0].is_leaf());
  CHECK(tree.nodes[0].categorical);
  CHECK(tree.nodes[0].threshold == 1.0);
  CHECK(tree.predict(std::vector<double>{1.0}) == 4);
  CHECK(tree.predict(std::vector<double>{0.0}) == 2);
  CHECK(tree.predict(std::vector<double>{2.0}) == 2);
}

TEST_CASE("min_samples_leaf bounds every leaf and max_depth bounds the path length") {
  std::mt19937_64 rng(6);
  std::vector<std::vector<double>> rows;
  std::vector<std::uint64_t> labels;
  for (int n = 0; n < 64; ++n) {
    rows.push_back({double(rng() % 32), double(rng() % 32)});
    labels.push_back(rng() % 4 * 2 + 2);
  }
  std::vector<FeatureKind> kinds{FeatureKind::numeric, FeatureKind::numeric};
  TreeHyper hyper;
  hyper.max_depth = 3;
  hyper.min_samples_leaf = 5;
  DecisionTree tree = fit_tree(rows, labels, kinds, hyper);
  CHECK(tree.depth() <= 3);
  std::size_t total = 0;
  for (const TreeNode& node : tree.nodes) {
    if (!node.is_leaf()) continue;
    std::size_t leaf_rows = 0;
    for (const auto& [label, count] : node.histogram) leaf_rows += count;
    CHECK(leaf_rows >= 5);
    total += leaf_rows;
  }
  CHECK(total == rows.size());  // leaf histograms sum to the routed rows
}

TEST_CASE("leaf ties resolve to the smaller partition count") {
  std::vector<std::vector<double>> rows{{1.0}, {1.0}};
  std::vector<std::uint64_t> labels{8, 2};
  std::vector<FeatureKind> kinds{FeatureKind::numeric};
  DecisionTree tree = fit_tree(rows, labels, kinds);  // indistinguishable rows -> leaf
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].label == 2);
}

TEST_CASE("fit_tree and fit_chained reject empty input") {
  std::vector<FeatureKind> kinds{FeatureKind::numeric};
  CHECK_THROWS_AS(fit_tree({}, {}, kinds), EmptyTrainingSet);
  CHECK_THROWS_AS(fit_chained({}), EmptyTrainingSet);
}

TEST_CASE("single example trains a pair of single-leaf trees") {
  std::vector<TrainingExample> rows{
      example(key("svm", TaskKind::classification, 51200, 256), {4, 16})};
  ChainedModel model = fit_chained(rows);
  CHECK(model.tree_r.nodes.size() == 1);
  CHECK(model.tree_c.nodes.size() == 1);
  // any key maps to the same prediction
  CHECK(predict(model, key("kmeans", TaskKind::clustering, 99999, 777)) == Partitioning{4, 16});
  CHECK(predict(model, rows[0].key) == Partitioning{4, 16});
}

TEST_CASE("fixture training rows are memorized under unlimited depth") {
  ChainedHyper hyper;
  hyper.tree.max_depth = 0;
  ChainedModel model = fit_chained(fixture_rows(), hyper);
  std::vector<TrainingExample> rows = fixture_rows();
  CHECK(predict(model, rows[0].key) == Partitioning{32, 4});
  CHECK(predict(model, rows[1].key) == Partitioning{32, 8});
  CHECK(predict(model, rows[2].key) == Partitioning{16, 16});
}

TEST_CASE("chained arity is base arity plus one") {
  ChainedModel model = fit_chained(fixture_rows());
  CHECK(model.tree_r.input_arity == model.schema.arity());
  CHECK(model.tree_c.input_arity == model.tree_r.input_arity + 1);
}

TEST_CASE("50 separable synthetic examples reach 100% training accuracy") {
  // deterministic rule: labels depend only on coarse feature thresholds, so
  // the set is separable by construction
  std::vector<TrainingExample> rows;
  std::mt19937_64 rng(21);
  for (int n = 0; n < 50; ++n) {
    std::uint64_t r = 1000ULL << (rng() % 8);
    std::uint64_t c = 16ULL << (rng() % 6);
    std::uint64_t p_r = r >= 32000 ? 16 : r >= 4000 ? 8 : 2;
    std::uint64_t p_c = c >= 128 ? 8 : 2;
    rows.push_back(example(key("kmeans", TaskKind::clustering, r, c), {p_r, p_c}));
  }
  ChainedHyper hyper;
  hyper.tree.max_depth = 0;
  ChainedModel model = fit_chained(rows, hyper);
  for (const TrainingExample& ex : rows) CHECK(predict(model, ex.key) == ex.best);
}

TEST_CASE("prediction is clamped to the query's dataset dims") {
  std::vector<TrainingExample> rows{
      example(key("pca", TaskKind::dim_reduction, 100000, 256), {4, 64})};
  ChainedModel model = fit_chained(rows);
  ConfigurationKey narrow = key("pca", TaskKind::dim_reduction, 100000, 27);
  CHECK(predict_unclamped(model, narrow) == Partitioning{4, 64});
  CHECK(predict(model, narrow) == Partitioning{4, 27});
}

TEST_CASE("label vocabularies are sorted and bounded by max_partitions") {
  ChainedModel model = fit_chained(fixture_rows());
  CHECK(model.label_vocab_r == std::vector<std::uint64_t>{16, 32});
  CHECK(model.label_vocab_c == std::vector<std::uint64_t>{4, 8, 16});
  CHECK(model.max_partitions == 4 * 64);
  for (std::uint64_t v : model.label_vocab_r) CHECK(v <= model.max_partitions);
}

TEST_CASE("labels above max_partitions are rejected at fit time") {
  // total cores 4, factor 4 -> max 16; a p_r* of 64 cannot come from a valid grid
  std::vector<TrainingExample> rows{
      example(key("svm", TaskKind::classification, 100000, 100000, 0, 1, 4), {64, 2})};
  CHECK_THROWS_AS(fit_chained(rows), InvalidField);
}

TEST_CASE("predict on an unfitted model throws") {
  ChainedModel model;
  CHECK_THROWS_AS(predict(model, key("svm", TaskKind::classification, 10, 10)), ModelNotFitted);
}

TEST_CASE("serialize/deserialize round trip preserves predictions") {
  ChainedHyper hyper;
  hyper.tree.max_depth = 0;
  ChainedModel model = fit_chained(fixture_rows(), hyper);
  std::string bytes = serialize_model(model);
  ChainedModel back = deserialize_model(bytes);
  for (const TrainingExample& ex : fixture_rows())
    CHECK(predict(back, ex.key) == predict(model, ex.key));
  CHECK(back.tree_c.input_arity == back.tree_r.input_arity + 1);
  CHECK(back.schema == model.schema);
  CHECK(back.label_vocab_r == model.label_vocab_r);
  CHECK(serialize_model(back) == bytes);
}

TEST_CASE("refitting identical input yields byte-identical serialized models") {
  ChainedModel a = fit_chained(fixture_rows());
  ChainedModel b = fit_chained(fixture_rows());
  CHECK(serialize_model(a) == serialize_model(b));
}

TEST_CASE("truncated model bytes are rejected") {
  std::string bytes = serialize_model(fit_chained(fixture_rows()));
  for (std::size_t cut : {bytes.size() / 4, bytes.size() / 2, bytes.size() - 5})
    CHECK_THROWS_AS(deserialize_model(std::string_view(bytes).substr(0, cut)), CorruptModel);
}

TEST_CASE("bumped version header is a VersionMismatch") {
  std::string bytes = serialize_model(fit_chained(fixture_rows()));
  std::size_t v = bytes.find("v1");
  bytes.replace(v, 2, "v2");
  CHECK_THROWS_AS(deserialize_model(bytes), VersionMismatch);
  CHECK_THROWS_AS(deserialize_model("definitely not a model"), CorruptModel);
}
