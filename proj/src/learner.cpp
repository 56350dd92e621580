#include "blockwise/learner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

int CategoricalVocab::code_of(std::string_view value) const {
  auto it = std::lower_bound(categories.begin(), categories.end(), value);
  if (it == categories.end() || *it != value) return unknown_code();
  return static_cast<int>(it - categories.begin());
}

FeatureSchema FeatureSchema::fit(std::span<const TrainingExample> examples) {
  if (examples.empty()) throw EmptyTrainingSet("cannot fit a feature schema on zero examples");

  std::set<std::string> algos, tasks, modes;
  FeatureSchema schema;
  schema.rows_min = schema.rows_max = examples.front().key.rows;
  schema.cols_min = schema.cols_max = examples.front().key.cols;
  for (const TrainingExample& ex : examples) {
    algos.insert(ex.key.algorithm);
    tasks.insert(to_string(ex.key.task_kind));
    modes.insert(to_string(ex.key.mode));
    schema.rows_min = std::min(schema.rows_min, ex.key.rows);
    schema.rows_max = std::max(schema.rows_max, ex.key.rows);
    schema.cols_min = std::min(schema.cols_min, ex.key.cols);
    schema.cols_max = std::max(schema.cols_max, ex.key.cols);
  }

  auto vocab = [](const std::set<std::string>& values) {
    CategoricalVocab v;
    v.categories.assign(values.begin(), values.end());
    return v;
  };
  schema.features = {
      {"rows", FeatureKind::numeric, {}},
      {"cols", FeatureKind::numeric, {}},
      {"size_bytes", FeatureKind::numeric, {}},
      {"nodes", FeatureKind::numeric, {}},
      {"cores_per_node", FeatureKind::numeric, {}},
      {"total_cores", FeatureKind::numeric, {}},
      {"ram_per_node_bytes", FeatureKind::numeric, {}},
      {"algorithm", FeatureKind::categorical, vocab(algos)},
      {"task_kind", FeatureKind::categorical, vocab(tasks)},
      {"mode", FeatureKind::categorical, vocab(modes)},
  };
  return schema;
}

std::vector<double> FeatureSchema::encode(const ConfigurationKey& key) const {
  std::vector<double> row;
  row.reserve(features.size());
  for (const FeatureDescriptor& f : features) {
    if (f.kind == FeatureKind::numeric) {
      if (f.name == "rows") row.push_back(static_cast<double>(key.rows));
      else if (f.name == "cols") row.push_back(static_cast<double>(key.cols));
      else if (f.name == "size_bytes") row.push_back(static_cast<double>(key.size_bytes));
      else if (f.name == "nodes") row.push_back(static_cast<double>(key.nodes));
      else if (f.name == "cores_per_node") row.push_back(static_cast<double>(key.cores_per_node));
      else if (f.name == "total_cores") row.push_back(static_cast<double>(key.total_cores()));
      else if (f.name == "ram_per_node_bytes")
        row.push_back(static_cast<double>(key.ram_per_node_bytes));
      else throw CorruptModel("unknown numeric feature '" + f.name + "'");
    } else {
      std::string value;
      if (f.name == "algorithm") value = key.algorithm;
      else if (f.name == "task_kind") value = to_string(key.task_kind);
      else if (f.name == "mode") value = to_string(key.mode);
      else throw CorruptModel("unknown categorical feature '" + f.name + "'");
      row.push_back(static_cast<double>(f.vocab.code_of(value)));
    }
  }
  return row;
}

std::vector<FeatureKind> FeatureSchema::kinds() const {
  std::vector<FeatureKind> out;
  out.reserve(features.size());
  for (const FeatureDescriptor& f : features) out.push_back(f.kind);
  return out;
}

double gini_impurity(std::span<const std::size_t> class_counts) {
  std::size_t total = 0;
  for (std::size_t c : class_counts) total += c;
  if (total == 0) return 0.0;
  double sq = 0.0;
  for (std::size_t c : class_counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    sq += p * p;
  }
  return 1.0 - sq;
}

namespace {

struct SplitChoice {
  bool found = false;
  double score = 0.0;
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;
};

struct TreeBuilder {
  const std::vector<std::vector<double>>& rows;
  std::span<const std::uint64_t> labels;
  std::span<const FeatureKind> kinds;
  TreeHyper hyper;
  std::vector<TreeNode> nodes;

  // class totals for a set of row indices, keyed by label (sorted)
  std::map<std::uint64_t, std::size_t> class_counts(std::span<const std::size_t> idx) const {
    std::map<std::uint64_t, std::size_t> counts;
    for (std::size_t i : idx) ++counts[labels[i]];
    return counts;
  }

  static double weighted_score(const std::map<std::uint64_t, std::size_t>& left,
                               const std::map<std::uint64_t, std::size_t>& right,
                               std::size_t total) {
    std::vector<std::size_t> lc, rc;
    std::size_t nl = 0, nr = 0;
    for (auto& [lab, c] : left) { lc.push_back(c); nl += c; }
    for (auto& [lab, c] : right) { rc.push_back(c); nr += c; }
    return (static_cast<double>(nl) * gini_impurity(lc) +
            static_cast<double>(nr) * gini_impurity(rc)) /
           static_cast<double>(total);
  }

  // Visits candidates in (feature asc, threshold asc) order and keeps only
  // strict improvements, which realizes the documented tie-break.
  SplitChoice best_split(std::span<const std::size_t> idx) const {
    SplitChoice best;
    std::size_t n = idx.size();
    for (int f = 0; f < static_cast<int>(kinds.size()); ++f) {
      if (kinds[f] == FeatureKind::numeric) {
        std::vector<std::size_t> order(idx.begin(), idx.end());
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return rows[a][f] < rows[b][f];
        });
        std::map<std::uint64_t, std::size_t> left, right = class_counts(idx);
        std::size_t moved = 0;
        for (std::size_t pos = 0; pos + 1 < n; ++pos) {
          std::size_t i = order[pos];
          ++left[labels[i]];
          auto rit = right.find(labels[i]);
          if (--rit->second == 0) right.erase(rit);
          ++moved;
          double v = rows[i][f];
          double next = rows[order[pos + 1]][f];
          if (v == next) continue;  // not a boundary between distinct values
          if (moved < hyper.min_samples_leaf || n - moved < hyper.min_samples_leaf) continue;
          double mid = v + (next - v) / 2.0;
          double score = weighted_score(left, right, n);
          if (!best.found || score < best.score) {
            best = SplitChoice{true, score, f, false, mid};
          }
        }
      } else {
        // distinct codes, each as a one-vs-rest equality split
        std::map<double, std::map<std::uint64_t, std::size_t>> by_code;
        std::map<std::uint64_t, std::size_t> total_counts = class_counts(idx);
        for (std::size_t i : idx) ++by_code[rows[i][f]][labels[i]];
        if (by_code.size() < 2) continue;
        for (auto& [code, left] : by_code) {
          std::size_t nl = 0;
          for (auto& [lab, c] : left) nl += c;
          if (nl < hyper.min_samples_leaf || n - nl < hyper.min_samples_leaf) continue;
          std::map<std::uint64_t, std::size_t> right = total_counts;
          for (auto& [lab, c] : left) {
            auto rit = right.find(lab);
            rit->second -= c;
            if (rit->second == 0) right.erase(rit);
          }
          double score = weighted_score(left, right, n);
          if (!best.found || score < best.score) {
            best = SplitChoice{true, score, f, true, code};
          }
        }
      }
    }
    return best;
  }

  std::int32_t make_leaf(std::span<const std::size_t> idx) {
    auto counts = class_counts(idx);
    TreeNode leaf;
    std::size_t best_count = 0;
    for (auto& [label, count] : counts) {
      leaf.histogram.emplace_back(label, count);
      if (count > best_count) {  // first strict max = smallest label among ties
        best_count = count;
        leaf.label = label;
      }
    }
    nodes.push_back(std::move(leaf));
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  std::int32_t build(std::vector<std::size_t> idx, std::uint32_t depth) {
    auto counts = class_counts(idx);
    bool pure = counts.size() <= 1;
    bool depth_capped = hyper.max_depth != 0 && depth >= hyper.max_depth;
    if (pure || depth_capped) return make_leaf(idx);

    SplitChoice split = best_split(idx);
    if (!split.found) return make_leaf(idx);  // indistinguishable rows

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      double v = rows[i][split.feature];
      bool go_left = split.categorical ? v == split.threshold : v <= split.threshold;
      (go_left ? left_idx : right_idx).push_back(i);
    }

    std::size_t self = nodes.size();
    TreeNode node;
    node.feature = split.feature;
    node.categorical = split.categorical;
    node.threshold = split.threshold;
    nodes.push_back(node);
    std::int32_t left = build(std::move(left_idx), depth + 1);
    std::int32_t right = build(std::move(right_idx), depth + 1);
    nodes[self].left = left;
    nodes[self].right = right;
    return static_cast<std::int32_t>(self);
  }
};

}  // namespace

std::uint64_t DecisionTree::predict(std::span<const double> row) const {
  if (nodes.empty()) throw ModelNotFitted("decision tree has no nodes");
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) {
    double v = row[static_cast<std::size_t>(node->feature)];
    bool go_left = node->categorical ? v == node->threshold : v <= node->threshold;
    node = &nodes[static_cast<std::size_t>(go_left ? node->left : node->right)];
  }
  return node->label;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  // iterative DFS over (node, depth)
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    const TreeNode& node = nodes[n];
    if (node.is_leaf()) {
      deepest = std::max(deepest, d);
    } else {
      stack.push_back({static_cast<std::size_t>(node.left), d + 1});
      stack.push_back({static_cast<std::size_t>(node.right), d + 1});
    }
  }
  return deepest;
}

DecisionTree fit_tree(const std::vector<std::vector<double>>& rows,
                      std::span<const std::uint64_t> labels, std::span<const FeatureKind> kinds,
                      const TreeHyper& hyper) {
  if (rows.empty()) throw EmptyTrainingSet("fit_tree needs at least one row");
  if (rows.size() != labels.size())
    throw InvalidField("labels", "row/label count mismatch");
  for (const auto& r : rows)
    if (r.size() != kinds.size()) throw InvalidField("rows", "row arity does not match schema");

  TreeBuilder builder{rows, labels, kinds, hyper, {}};
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  builder.build(std::move(all), 0);

  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  tree.input_arity = kinds.size();
  return tree;
}

ChainedModel fit_chained(std::span<const TrainingExample> examples, const ChainedHyper& hyper,
                         int step) {
  if (examples.empty()) throw EmptyTrainingSet("fit_chained needs at least one example");

  ChainedModel model;
  model.schema = FeatureSchema::fit(examples);
  model.hyper = hyper;
  model.step = step;

  std::uint64_t max_cores = 0;
  for (const TrainingExample& ex : examples)
    max_cores = std::max(max_cores, ex.key.total_cores());
  model.max_partitions = static_cast<std::uint64_t>(hyper.max_partitions_factor) * max_cores;

  std::vector<std::vector<double>> base_rows;
  std::vector<std::uint64_t> labels_r, labels_c;
  base_rows.reserve(examples.size());
  for (const TrainingExample& ex : examples) {
    if (ex.best.p_r < 1 || ex.best.p_r > model.max_partitions)
      throw InvalidField("p_r", "label " + std::to_string(ex.best.p_r) +
                                    " outside [1, " + std::to_string(model.max_partitions) + "]");
    if (ex.best.p_c < 1 || ex.best.p_c > model.max_partitions)
      throw InvalidField("p_c", "label " + std::to_string(ex.best.p_c) +
                                    " outside [1, " + std::to_string(model.max_partitions) + "]");
    base_rows.push_back(model.schema.encode(ex.key));
    labels_r.push_back(ex.best.p_r);
    labels_c.push_back(ex.best.p_c);
  }

  std::vector<FeatureKind> kinds = model.schema.kinds();
  model.tree_r = fit_tree(base_rows, labels_r, kinds, hyper.tree);

  // DT_c sees DT_r's prediction on each training row, not the true p_r*.
  std::vector<std::vector<double>> chained_rows = base_rows;
  for (std::size_t n = 0; n < chained_rows.size(); ++n)
    chained_rows[n].push_back(static_cast<double>(model.tree_r.predict(base_rows[n])));
  std::vector<FeatureKind> chained_kinds = kinds;
  chained_kinds.push_back(FeatureKind::numeric);
  model.tree_c = fit_tree(chained_rows, labels_c, chained_kinds, hyper.tree);

  std::set<std::uint64_t> vr(labels_r.begin(), labels_r.end());
  std::set<std::uint64_t> vc(labels_c.begin(), labels_c.end());
  model.label_vocab_r.assign(vr.begin(), vr.end());
  model.label_vocab_c.assign(vc.begin(), vc.end());
  return model;
}

Partitioning predict_unclamped(const ChainedModel& model, const ConfigurationKey& key) {
  if (!model.fitted()) throw ModelNotFitted("chained model is not fitted");
  std::vector<double> row = model.schema.encode(key);
  std::uint64_t p_r = model.tree_r.predict(row);
  row.push_back(static_cast<double>(p_r));
  std::uint64_t p_c = model.tree_c.predict(row);
  return Partitioning{p_r, p_c};
}

Partitioning predict(const ChainedModel& model, const ConfigurationKey& key) {
  return clamp_partitioning(dataset_of(key), predict_unclamped(model, key));
}

namespace {

constexpr const char* kModelMagic = "blockwise-model";
constexpr const char* kModelVersion = "v1";

void serialize_tree(std::ostream& out, const DecisionTree& tree, std::size_t node) {
  const TreeNode& n = tree.nodes[node];
  if (n.is_leaf()) {
    out << "l\t" << n.label << '\t' << n.histogram.size();
    for (const auto& [label, count] : n.histogram) out << '\t' << label << ':' << count;
    out << '\n';
  } else {
    out << "n\t" << n.feature << '\t' << (n.categorical ? "cat" : "num") << '\t'
        << format_double(n.threshold) << '\n';
    serialize_tree(out, tree, static_cast<std::size_t>(n.left));
    serialize_tree(out, tree, static_cast<std::size_t>(n.right));
  }
}

struct LineReader {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;

  explicit LineReader(std::string_view bytes) {
    std::size_t start = 0;
    while (start < bytes.size()) {
      std::size_t nl = bytes.find('\n', start);
      if (nl == std::string_view::npos) {
        lines.push_back(bytes.substr(start));
        break;
      }
      lines.push_back(bytes.substr(start, nl - start));
      start = nl + 1;
    }
  }

  std::string_view next(const char* what) {
    if (pos >= lines.size())
      throw CorruptModel("model file truncated while reading " + std::string(what));
    return lines[pos++];
  }
  bool done() const { return pos >= lines.size(); }
};

std::uint64_t model_u64(std::string_view token, const char* what) {
  try {
    return parse_u64(token, what);
  } catch (const MalformedRecord& e) {
    throw CorruptModel(e.what());
  }
}

double model_double(std::string_view token, const char* what) {
  try {
    return parse_double(token, what);
  } catch (const MalformedRecord& e) {
    throw CorruptModel(e.what());
  }
}

std::int32_t deserialize_tree(LineReader& reader, DecisionTree& tree, std::size_t arity,
                              int depth = 0) {
  if (depth > 512) throw CorruptModel("tree nesting too deep");
  auto fields = split_tabs(reader.next("tree node"));
  if (fields.empty()) throw CorruptModel("empty tree node line");
  if (fields[0] == "l") {
    if (fields.size() < 3) throw CorruptModel("leaf line needs label and histogram size");
    TreeNode leaf;
    leaf.label = model_u64(fields[1], "leaf label");
    std::size_t hist = model_u64(fields[2], "histogram size");
    if (fields.size() != 3 + hist) throw CorruptModel("histogram entry count mismatch");
    for (std::size_t h = 0; h < hist; ++h) {
      std::string_view entry = fields[3 + h];
      std::size_t colon = entry.find(':');
      if (colon == std::string_view::npos) throw CorruptModel("histogram entry missing ':'");
      leaf.histogram.emplace_back(model_u64(entry.substr(0, colon), "histogram label"),
                                  model_u64(entry.substr(colon + 1), "histogram count"));
    }
    tree.nodes.push_back(std::move(leaf));
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  }
  if (fields[0] == "n") {
    if (fields.size() != 4) throw CorruptModel("internal node line needs 4 fields");
    TreeNode node;
    std::uint64_t feature = model_u64(fields[1], "feature index");
    if (feature >= arity) throw CorruptModel("feature index out of range");
    node.feature = static_cast<std::int32_t>(feature);
    if (fields[2] == "cat") node.categorical = true;
    else if (fields[2] == "num") node.categorical = false;
    else throw CorruptModel("split kind must be 'num' or 'cat'");
    node.threshold = model_double(fields[3], "threshold");
    std::size_t self = tree.nodes.size();
    tree.nodes.push_back(node);
    std::int32_t left = deserialize_tree(reader, tree, arity, depth + 1);
    std::int32_t right = deserialize_tree(reader, tree, arity, depth + 1);
    tree.nodes[self].left = left;
    tree.nodes[self].right = right;
    return static_cast<std::int32_t>(self);
  }
  throw CorruptModel("unknown tree node tag '" + std::string(fields[0]) + "'");
}

}  // namespace

std::string serialize_model(const ChainedModel& model) {
  if (!model.fitted()) throw ModelNotFitted("cannot serialize an unfitted model");
  std::ostringstream out;
  out << kModelMagic << '\t' << kModelVersion << '\n';
  out << "step\t" << model.step << '\n';
  out << "max_partitions\t" << model.max_partitions << '\n';
  out << "hyper\t" << model.hyper.tree.max_depth << '\t' << model.hyper.tree.min_samples_leaf
      << '\t' << model.hyper.max_partitions_factor << '\n';
  out << "ranges\t" << model.schema.rows_min << '\t' << model.schema.rows_max << '\t'
      << model.schema.cols_min << '\t' << model.schema.cols_max << '\n';
  out << "schema\t" << model.schema.features.size() << '\n';
  for (const FeatureDescriptor& f : model.schema.features) {
    if (f.kind == FeatureKind::numeric) {
      out << "feature\t" << f.name << "\tnumeric\n";
    } else {
      out << "feature\t" << f.name << "\tcategorical\t" << (f.vocab.categories.size() + 1);
      for (const std::string& c : f.vocab.categories) out << '\t' << c;
      out << '\t' << CategoricalVocab::kUnknown << '\n';
    }
  }
  auto labels = [&out](const char* tag, const std::vector<std::uint64_t>& vocab) {
    out << tag << '\t' << vocab.size();
    for (std::uint64_t v : vocab) out << '\t' << v;
    out << '\n';
  };
  labels("labels_r", model.label_vocab_r);
  labels("labels_c", model.label_vocab_c);
  out << "tree\tr\t" << model.tree_r.input_arity << '\n';
  serialize_tree(out, model.tree_r, 0);
  out << "tree\tc\t" << model.tree_c.input_arity << '\n';
  serialize_tree(out, model.tree_c, 0);
  out << "end\n";
  return out.str();
}

ChainedModel deserialize_model(std::string_view bytes) {
  LineReader reader(bytes);

  auto magic = split_tabs(reader.next("header"));
  if (magic.size() != 2 || magic[0] != kModelMagic)
    throw CorruptModel("not a blockwise model file");
  if (magic[1] != kModelVersion)
    throw VersionMismatch("model file version '" + std::string(magic[1]) + "', expected '" +
                          kModelVersion + "'");

  ChainedModel model;

  auto expect = [&reader](const char* tag, std::size_t nfields) {
    auto fields = split_tabs(reader.next(tag));
    if (fields.size() != nfields || fields[0] != tag)
      throw CorruptModel(std::string("expected '") + tag + "' line");
    return fields;
  };

  auto step_fields = expect("step", 2);
  model.step = static_cast<int>(model_u64(step_fields[1], "step"));
  if (model.step < 2) throw CorruptModel("step out of range");

  auto mp_fields = expect("max_partitions", 2);
  model.max_partitions = model_u64(mp_fields[1], "max_partitions");

  auto hyper_fields = expect("hyper", 4);
  model.hyper.tree.max_depth = static_cast<std::uint32_t>(model_u64(hyper_fields[1], "max_depth"));
  model.hyper.tree.min_samples_leaf =
      static_cast<std::uint32_t>(model_u64(hyper_fields[2], "min_samples_leaf"));
  model.hyper.max_partitions_factor =
      static_cast<std::uint32_t>(model_u64(hyper_fields[3], "max_partitions_factor"));

  auto range_fields = expect("ranges", 5);
  model.schema.rows_min = model_u64(range_fields[1], "rows_min");
  model.schema.rows_max = model_u64(range_fields[2], "rows_max");
  model.schema.cols_min = model_u64(range_fields[3], "cols_min");
  model.schema.cols_max = model_u64(range_fields[4], "cols_max");

  auto schema_fields = expect("schema", 2);
  std::size_t nfeatures = model_u64(schema_fields[1], "feature count");
  for (std::size_t n = 0; n < nfeatures; ++n) {
    auto fields = split_tabs(reader.next("feature"));
    if (fields.size() < 3 || fields[0] != "feature") throw CorruptModel("expected 'feature' line");
    FeatureDescriptor f;
    f.name = std::string(fields[1]);
    if (fields[2] == "numeric") {
      if (fields.size() != 3) throw CorruptModel("numeric feature line has extra fields");
      f.kind = FeatureKind::numeric;
    } else if (fields[2] == "categorical") {
      f.kind = FeatureKind::categorical;
      if (fields.size() < 4) throw CorruptModel("categorical feature missing vocabulary size");
      std::size_t vocab_size = model_u64(fields[3], "vocabulary size");
      if (vocab_size < 1 || fields.size() != 4 + vocab_size)
        throw CorruptModel("vocabulary entry count mismatch");
      for (std::size_t v = 0; v + 1 < vocab_size; ++v)
        f.vocab.categories.emplace_back(fields[4 + v]);
      if (fields.back() != CategoricalVocab::kUnknown)
        throw CorruptModel("vocabulary must end with the UNKNOWN token");
      if (!std::is_sorted(f.vocab.categories.begin(), f.vocab.categories.end()))
        throw CorruptModel("vocabulary is not sorted");
    } else {
      throw CorruptModel("feature kind must be 'numeric' or 'categorical'");
    }
    model.schema.features.push_back(std::move(f));
  }

  auto read_labels = [&](const char* tag, std::vector<std::uint64_t>& vocab) {
    auto fields = split_tabs(reader.next(tag));
    if (fields.size() < 2 || fields[0] != tag)
      throw CorruptModel(std::string("expected '") + tag + "' line");
    std::size_t count = model_u64(fields[1], "label count");
    if (fields.size() != 2 + count) throw CorruptModel("label entry count mismatch");
    for (std::size_t v = 0; v < count; ++v)
      vocab.push_back(model_u64(fields[2 + v], "label value"));
    if (!std::is_sorted(vocab.begin(), vocab.end()))
      throw CorruptModel("label vocabulary is not sorted");
  };
  read_labels("labels_r", model.label_vocab_r);
  read_labels("labels_c", model.label_vocab_c);

  auto read_tree = [&](const char* which, DecisionTree& tree) {
    auto fields = split_tabs(reader.next("tree header"));
    if (fields.size() != 3 || fields[0] != "tree" || fields[1] != which)
      throw CorruptModel(std::string("expected 'tree ") + which + "' header");
    tree.input_arity = model_u64(fields[2], "tree arity");
    deserialize_tree(reader, tree, tree.input_arity);
  };
  read_tree("r", model.tree_r);
  read_tree("c", model.tree_c);

  if (model.tree_c.input_arity != model.tree_r.input_arity + 1)
    throw CorruptModel("chained arity violated: tree_c must take one more input than tree_r");
  if (model.tree_r.input_arity != model.schema.arity())
    throw CorruptModel("tree_r arity does not match the schema");

  auto end = reader.next("end marker");
  if (end != "end") throw CorruptModel("missing end marker");
  while (!reader.done())
    if (!reader.next("trailing").empty()) throw CorruptModel("trailing content after end marker");

  for (std::uint64_t v : model.label_vocab_r)
    if (v < 1 || v > model.max_partitions) throw CorruptModel("label_vocab_r out of range");
  for (std::uint64_t v : model.label_vocab_c)
    if (v < 1 || v > model.max_partitions) throw CorruptModel("label_vocab_c out of range");

  return model;
}

}  // namespace blockwise
