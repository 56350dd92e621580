// blockwise: block-size advisor for data-parallel workloads.
//
// Pipeline: ingest -> extract -> gridsearch -> train -> predict -> eval,
// plus a `simulate` debugging command for the built-in cost model.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "blockwise/advisor.hpp"
#include "blockwise/config.hpp"
#include "blockwise/errors.hpp"
#include "blockwise/extraction.hpp"
#include "blockwise/gridsearch.hpp"
#include "blockwise/learner.hpp"
#include "blockwise/log_ingest.hpp"
#include "blockwise/metrics.hpp"
#include "blockwise/simulator.hpp"
#include "blockwise/text_util.hpp"

namespace bw = blockwise;

namespace {

struct QueryFlags {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t size_bytes = 0;
  std::uint32_t elem_bytes = 8;
  std::string algo;
  std::string task = "other";
  std::string mode = "train";
  std::uint32_t nodes = 0;
  std::uint32_t cores = 0;
  std::uint64_t ram = 0;
};

void add_query_flags(CLI::App* cmd, QueryFlags& q, bool& elem_given) {
  cmd->add_option("--rows", q.rows, "Dataset rows")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--cols", q.cols, "Dataset columns")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--size-bytes", q.size_bytes, "Dataset footprint in bytes (0 = unknown)")
      ->capture_default_str();
  cmd->add_option("--elem-bytes", q.elem_bytes, "Bytes per element")
      ->capture_default_str()
      ->check(CLI::PositiveNumber)
      ->each([&elem_given](const std::string&) { elem_given = true; });
  cmd->add_option("--algo", q.algo, "Algorithm name")->required();
  cmd->add_option("--task", q.task, "Task kind: classification|clustering|dim_reduction|other")
      ->capture_default_str();
  cmd->add_option("--mode", q.mode, "Usage mode: train|inference")->capture_default_str();
  cmd->add_option("--nodes", q.nodes, "Node count")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--cores", q.cores, "Cores per node")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--ram", q.ram, "RAM per node in bytes")->required()->check(CLI::PositiveNumber);
}

bw::DatasetDescriptor dataset_from(const QueryFlags& q, bool elem_given) {
  bw::DatasetDescriptor d;
  d.rows = q.rows;
  d.cols = q.cols;
  d.size_bytes = q.size_bytes;
  d.element_bytes = q.elem_bytes;
  d.element_bytes_known = elem_given;
  return d;
}

bw::AlgorithmDescriptor algorithm_from(const QueryFlags& q) {
  return {bw::lowercase(q.algo), bw::task_kind_from_string(q.task),
          bw::run_mode_from_string(q.mode)};
}

bw::EnvironmentDescriptor environment_from(const QueryFlags& q) {
  return {q.nodes, q.cores, q.ram};
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  out += "'";
  return out;
}

// External trial runner: the command sees the configuration via BLOCKWISE_*
// environment variables, prints the measured seconds on stdout, and exits
// nonzero to report a failed trial.
bw::Executor command_executor(const std::string& command) {
  return [command](const bw::DatasetDescriptor& d, const bw::AlgorithmDescriptor& a,
                   const bw::EnvironmentDescriptor& e,
                   const bw::Partitioning& p) -> bw::TrialTime {
    std::ostringstream full;
    full << "env";
    auto kv = [&full](const char* key, const std::string& value) {
      full << ' ' << key << '=' << shell_quote(value);
    };
    kv("BLOCKWISE_ALGO", a.name);
    kv("BLOCKWISE_TASK", to_string(a.task_kind));
    kv("BLOCKWISE_MODE", to_string(a.mode));
    kv("BLOCKWISE_ROWS", std::to_string(d.rows));
    kv("BLOCKWISE_COLS", std::to_string(d.cols));
    kv("BLOCKWISE_SIZE_BYTES", std::to_string(d.size_bytes));
    kv("BLOCKWISE_ELEM_BYTES", std::to_string(d.element_bytes));
    kv("BLOCKWISE_NODES", std::to_string(e.nodes));
    kv("BLOCKWISE_CORES_PER_NODE", std::to_string(e.cores_per_node));
    kv("BLOCKWISE_RAM_PER_NODE_BYTES", std::to_string(e.ram_per_node_bytes));
    kv("BLOCKWISE_P_R", std::to_string(p.p_r));
    kv("BLOCKWISE_P_C", std::to_string(p.p_c));
    full << ' ' << command;

    FILE* pipe = popen(full.str().c_str(), "r");
    if (!pipe) throw bw::ExecutorError("cannot launch executor command");
    std::string output;
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) output += buf;
    int status = pclose(pipe);
    if (status != 0) return bw::TrialTime::failed();

    std::istringstream tokens(output);
    std::string token;
    if (!(tokens >> token))
      throw bw::ExecutorError("executor command printed no time");
    try {
      return bw::TrialTime::of_seconds(bw::parse_double(token, "executor output"));
    } catch (const bw::InputError& err) {
      throw bw::ExecutorError(std::string("bad executor output: ") + err.what());
    }
  };
}

// Median-of-N wrapper for noisy executors (FAILED counts as +inf, so a
// majority of failures medians to FAILED).
bw::Executor median_executor(bw::Executor inner, unsigned repeats) {
  if (repeats <= 1) return inner;
  return [inner = std::move(inner), repeats](
             const bw::DatasetDescriptor& d, const bw::AlgorithmDescriptor& a,
             const bw::EnvironmentDescriptor& e, const bw::Partitioning& p) -> bw::TrialTime {
    std::vector<double> seconds;
    for (unsigned n = 0; n < repeats; ++n) seconds.push_back(inner(d, a, e, p).seconds());
    std::sort(seconds.begin(), seconds.end());
    double median = repeats % 2 ? seconds[repeats / 2]
                                : (seconds[repeats / 2 - 1] + seconds[repeats / 2]) / 2;
    if (!std::isfinite(median)) return bw::TrialTime::failed();
    return bw::TrialTime::of_seconds(median);
  };
}

bw::ChainedModel load_model(const std::string& path) {
  std::string bytes;
  try {
    bytes = bw::read_file(path);
  } catch (const bw::IoFailure& e) {
    throw bw::ModelError(e.what());
  }
  return bw::deserialize_model(bytes);
}

std::string render_training_set(std::span<const bw::TrainingExample> examples) {
  std::ostringstream out;
  bw::write_training_set(out, examples);
  return out.str();
}

// Find --config/-c on the raw argv (and the BLOCKWISE_CONFIG fallback) before
// CLI11 runs, so config values can serve as the displayed flag defaults.
std::string pre_scan_config_path(int argc, char** argv) {
  for (int n = 1; n < argc; ++n) {
    std::string arg = argv[n];
    if (arg == "--config" || arg == "-c") {
      if (n + 1 < argc) return argv[n + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      return arg.substr(9);
    }
  }
  const char* env = std::getenv("BLOCKWISE_CONFIG");
  return env ? env : "";
}

int run(int argc, char** argv) {
  std::string config_path = pre_scan_config_path(argc, argv);
  bw::Config config;
  if (!config_path.empty()) config = bw::Config::load_file(config_path);

  CLI::App app{"blockwise: learned block-size recommendations for data-parallel runs"};
  app.require_subcommand(1);
  std::string config_path_opt;
  app.add_option("-c,--config", config_path_opt,
                 "Config file (also via BLOCKWISE_CONFIG); flags override config values");
  app.add_option("--seed", config.seed, "Top-level seed; per-component seeds derive from it")
      ->capture_default_str();

  // ---- ingest ----------------------------------------------------------
  auto* c_ingest = app.add_subcommand("ingest", "Validate and normalize an execution log");
  std::string ingest_log = config.log_path;
  std::string ingest_out;
  bool strict = config.parse_mode == bw::ParseMode::strict;
  c_ingest->add_option("--log", ingest_log, "Log file to read")->capture_default_str();
  c_ingest->add_option("--out", ingest_out, "Write the normalized log here");
  c_ingest->add_flag("--strict,!--lenient", strict, "Abort on the first malformed line");
  c_ingest->callback([&] {
    if (ingest_log.empty()) throw CLI::ValidationError("ingest", "--log is required");
    bw::IngestResult result =
        bw::ingest(ingest_log, strict ? bw::ParseMode::strict : bw::ParseMode::lenient);
    if (!ingest_out.empty()) {
      std::string normalized;
      for (const bw::ExecutionRecord& rec : result.records)
        normalized += bw::serialize_record(rec) + "\n";
      bw::atomic_write_file(ingest_out, normalized);
    }
    std::cout << "records=" << result.records.size() << " skipped=" << result.skipped_malformed
              << "\n";
  });

  // ---- extract ---------------------------------------------------------
  auto* c_extract = app.add_subcommand("extract", "Build the training set from a log");
  std::string extract_log = config.log_path;
  std::string extract_out = config.training_path;
  bool extract_strict = config.parse_mode == bw::ParseMode::strict;
  c_extract->add_option("--log", extract_log, "Log file to read")->capture_default_str();
  c_extract->add_option("--out", extract_out, "Training-set file to write")->capture_default_str();
  c_extract->add_flag("--strict,!--lenient", extract_strict, "Abort on the first malformed line");
  c_extract->callback([&] {
    if (extract_log.empty()) throw CLI::ValidationError("extract", "--log is required");
    if (extract_out.empty()) throw CLI::ValidationError("extract", "--out is required");
    bw::IngestResult ingested = bw::ingest(
        extract_log, extract_strict ? bw::ParseMode::strict : bw::ParseMode::lenient);
    bw::ExtractionResult result = bw::extract_training_set(ingested.records);
    bw::atomic_write_file(extract_out, render_training_set(result.examples));
    if (result.examples.empty())
      std::cerr << "warning: training set is empty (no finite-time groups in the log)\n";
    std::cout << "examples=" << result.examples.size()
              << " dropped_groups=" << result.dropped_groups
              << " skipped_lines=" << ingested.skipped_malformed << "\n";
  });

  // ---- gridsearch ------------------------------------------------------
  auto* c_grid = app.add_subcommand(
      "gridsearch", "Run (or resume) a k x k partitioning search and label the configuration");
  QueryFlags grid_q;
  bool grid_elem_given = false;
  add_query_flags(c_grid, grid_q, grid_elem_given);
  int grid_step = config.step;
  unsigned grid_par = config.parallelism;
  std::string grid_training = config.training_path;
  std::string grid_file;
  std::string grid_executor = "sim";
  std::string grid_command;
  c_grid->add_option("--step", grid_step, "Partition ladder base s")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  c_grid->add_option("--parallelism", grid_par, "Concurrent trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_grid->add_option("--training", grid_training, "Training-set file to append the label to")
      ->capture_default_str();
  c_grid->add_option("--grid-file", grid_file,
                     "Persist the grid here; an existing file resumes the search");
  c_grid->add_option("--executor", grid_executor, "Trial runner: sim|cmd")
      ->capture_default_str()
      ->check(CLI::IsMember({"sim", "cmd"}));
  c_grid->add_option("--command", grid_command,
                     "Shell command for --executor cmd (sees BLOCKWISE_* env vars)");
  c_grid->callback([&] {
    bw::DatasetDescriptor d = dataset_from(grid_q, grid_elem_given);
    bw::AlgorithmDescriptor a = algorithm_from(grid_q);
    bw::EnvironmentDescriptor e = environment_from(grid_q);

    bw::Executor exec;
    if (grid_executor == "cmd") {
      if (grid_command.empty())
        throw CLI::ValidationError("gridsearch", "--executor cmd needs --command");
      exec = command_executor(grid_command);
    } else {
      exec = bw::simulator_executor(config.cost_models());
    }

    bw::GridShape shape = bw::grid_shape(e.total_cores(), grid_step);
    if (!shape.exact)
      std::cerr << "warning: total_cores " << e.total_cores() << " is not a power of "
                << grid_step << "; grid truncated at k=" << shape.k << "\n";

    bw::GridSearchOptions options;
    options.step = grid_step;
    options.parallelism = grid_par;
    bw::SearchGrid resumed;
    if (!grid_file.empty() && std::filesystem::exists(grid_file)) {
      std::ifstream in(grid_file);
      resumed = bw::read_grid(in);
      options.resume = &resumed;
    }
    if (!grid_file.empty()) {
      options.checkpoint = [&grid_file](const bw::SearchGrid& grid) {
        std::ostringstream out;
        bw::write_grid(out, grid);
        bw::atomic_write_file(grid_file, out.str());
      };
    }

    bw::GridSearchOutcome outcome = bw::run_grid_search(d, a, e, exec, options);
    if (!grid_file.empty()) {
      std::ostringstream out;
      bw::write_grid(out, outcome.grid);
      bw::atomic_write_file(grid_file, out.str());
    }
    if (!grid_training.empty()) {
      std::string existing;
      if (std::filesystem::exists(grid_training)) existing = bw::read_file(grid_training);
      existing += bw::serialize_example(outcome.best) + "\n";
      bw::atomic_write_file(grid_training, existing);
    }
    std::cout << "k=" << outcome.grid.k << " cells=" << outcome.grid.cells.size()
              << " trials=" << outcome.executor_calls << " best_p_r=" << outcome.best.best.p_r
              << " best_p_c=" << outcome.best.best.p_c
              << " best_time=" << bw::format_double(outcome.best.best_time) << "\n";
  });

  // ---- train -----------------------------------------------------------
  auto* c_train = app.add_subcommand("train", "Fit the chained model from a training set");
  std::string train_in = config.training_path;
  std::string train_out = config.model_path;
  std::uint32_t max_depth = config.max_depth;
  std::uint32_t min_samples_leaf = config.min_samples_leaf;
  std::uint32_t max_partitions_factor = config.max_partitions_factor;
  int train_step = config.step;
  c_train->add_option("--training", train_in, "Training-set file")->capture_default_str();
  c_train->add_option("--model", train_out, "Model file to write")->capture_default_str();
  c_train->add_option("--max-depth", max_depth, "Tree depth limit (0 = unlimited)")
      ->capture_default_str();
  c_train->add_option("--min-samples-leaf", min_samples_leaf, "Minimum rows per leaf")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_train
      ->add_option("--max-partitions-factor", max_partitions_factor,
                   "Label cap = factor x max training total_cores")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_train->add_option("--step", train_step, "Partition ladder base recorded in the model")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  c_train->callback([&] {
    if (train_in.empty()) throw CLI::ValidationError("train", "--training is required");
    if (train_out.empty()) throw CLI::ValidationError("train", "--model is required");
    std::ifstream in(train_in);
    if (!in) throw bw::IoFailure("cannot open training set " + train_in);
    std::vector<bw::TrainingExample> examples = bw::read_training_set(in);
    bw::ChainedHyper hyper;
    hyper.tree.max_depth = max_depth;
    hyper.tree.min_samples_leaf = min_samples_leaf;
    hyper.max_partitions_factor = max_partitions_factor;
    bw::ChainedModel model = bw::fit_chained(examples, hyper, train_step);
    bw::atomic_write_file(train_out, bw::serialize_model(model));
    std::cout << "examples=" << examples.size() << " tree_r_nodes=" << model.tree_r.nodes.size()
              << " tree_c_nodes=" << model.tree_c.nodes.size()
              << " labels_r=" << model.label_vocab_r.size()
              << " labels_c=" << model.label_vocab_c.size() << "\n";
  });

  // ---- predict ---------------------------------------------------------
  auto* c_predict = app.add_subcommand("predict", "Recommend a partitioning and block size");
  QueryFlags pred_q;
  bool pred_elem_given = false;
  std::string pred_model = config.model_path;
  bool machine_only = false;
  c_predict->add_option("--model", pred_model, "Model file")->capture_default_str();
  add_query_flags(c_predict, pred_q, pred_elem_given);
  c_predict->add_flag("--machine", machine_only, "Print only the machine-readable line");
  c_predict->callback([&] {
    if (pred_model.empty()) throw CLI::ValidationError("predict", "--model is required");
    bw::ChainedModel model = load_model(pred_model);
    bw::Recommendation rec = bw::recommend(model, dataset_from(pred_q, pred_elem_given),
                                           algorithm_from(pred_q), environment_from(pred_q));
    if (!machine_only) {
      std::cout << "partitioning: (" << rec.partitioning.p_r << ", " << rec.partitioning.p_c
                << ")\n"
                << "block size:   (" << rec.block.block_rows << ", " << rec.block.block_cols
                << ")\n"
                << "total blocks: " << rec.total_blocks << "\n";
      for (const std::string& w : rec.warnings) std::cout << "warning: " << w << "\n";
    }
    std::cout << bw::machine_line(rec) << "\n";
  });

  // ---- eval ------------------------------------------------------------
  auto* c_eval = app.add_subcommand(
      "eval", "Compare the model's recommendation against a full partitioning sweep");
  QueryFlags eval_q;
  bool eval_elem_given = false;
  std::string eval_model = config.model_path;
  std::string eval_heatmap;
  std::string eval_executor = "sim";
  std::string eval_command;
  int eval_step = config.step;
  unsigned eval_par = config.parallelism;
  unsigned eval_repeats = 1;
  bool include_identity = config.include_identity;
  c_eval->add_option("--model", eval_model, "Model file")->capture_default_str();
  add_query_flags(c_eval, eval_q, eval_elem_given);
  c_eval->add_option("--heatmap", eval_heatmap, "Write the sweep table here");
  c_eval->add_option("--executor", eval_executor, "Trial runner: sim|cmd")
      ->capture_default_str()
      ->check(CLI::IsMember({"sim", "cmd"}));
  c_eval->add_option("--command", eval_command, "Shell command for --executor cmd");
  c_eval->add_option("--step", eval_step, "Partition ladder base s")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  c_eval->add_option("--parallelism", eval_par, "Concurrent trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_eval->add_option("--repeats", eval_repeats, "Trials per cell, median taken")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_eval->add_flag("--include-identity", include_identity,
                   "Also sweep the unpartitioned (1, 1) case");
  c_eval->callback([&] {
    if (eval_model.empty()) throw CLI::ValidationError("eval", "--model is required");
    bw::ChainedModel model = load_model(eval_model);
    bw::DatasetDescriptor d = dataset_from(eval_q, eval_elem_given);
    bw::AlgorithmDescriptor a = algorithm_from(eval_q);
    bw::EnvironmentDescriptor e = environment_from(eval_q);

    bw::Executor exec;
    if (eval_executor == "cmd") {
      if (eval_command.empty())
        throw CLI::ValidationError("eval", "--executor cmd needs --command");
      exec = command_executor(eval_command);
    } else {
      exec = bw::simulator_executor(config.cost_models());
    }
    exec = median_executor(std::move(exec), eval_repeats);

    bw::GridSearchOptions options;
    options.step = eval_step;
    options.parallelism = eval_par;
    bw::GridSearchOutcome outcome = bw::run_grid_search(d, a, e, exec, options);

    std::vector<std::pair<bw::Partitioning, bw::TrialTime>> sweep;
    for (const bw::GridCell& cell : outcome.grid.cells) sweep.emplace_back(cell.part, *cell.time);
    if (include_identity) {
      bw::Partitioning identity = bw::clamp_partitioning(d, {1, 1});
      sweep.emplace_back(identity, exec(d, a, e, identity));
    }

    bw::Recommendation rec = bw::recommend(model, d, a, e);
    bw::TrialTime t_star;
    bool reused = false;
    for (const auto& [part, time] : sweep)
      if (part == rec.partitioning) {
        t_star = time;
        reused = true;
        break;
      }
    if (!reused) {
      t_star = exec(d, a, e, rec.partitioning);
      sweep.emplace_back(rec.partitioning, t_star);
    }
    if (t_star.is_failed())
      throw bw::ExecutorError("the recommended partitioning failed to execute");

    bw::MakespanComparison cmp = bw::compare(t_star.seconds(), sweep);

    if (!eval_heatmap.empty()) {
      std::ostringstream table;
      bw::export_heatmap(table, outcome.grid, rec.partitioning, outcome.best.best);
      bw::atomic_write_file(eval_heatmap, table.str());
    }

    std::cout << "predicted p_r=" << rec.partitioning.p_r << " p_c=" << rec.partitioning.p_c
              << " t_star=" << bw::format_double(t_star.seconds()) << "\n";
    std::cout << "grid_best p_r=" << outcome.best.best.p_r << " p_c=" << outcome.best.best.p_c
              << " time=" << bw::format_double(outcome.best.best_time) << "\n";
    std::cout << "best t_other=" << bw::format_double(cmp.best_other)
              << " ratio=" << bw::format_sig(cmp.ratio_vs_best, 6)
              << " reduction=" << bw::format_sig(cmp.reduction_vs_best, 6) << "\n";
    std::cout << "avg t_other=" << bw::format_double(cmp.avg_other)
              << " ratio=" << bw::format_sig(cmp.ratio_vs_avg, 6)
              << " reduction=" << bw::format_sig(cmp.reduction_vs_avg, 6) << "\n";
    std::cout << "worst t_other=" << bw::format_double(cmp.worst_other)
              << " ratio=" << bw::format_sig(cmp.ratio_vs_worst, 6)
              << " reduction=" << bw::format_sig(cmp.reduction_vs_worst, 6) << "\n";
  });

  // ---- simulate --------------------------------------------------------
  auto* c_sim = app.add_subcommand("simulate", "Evaluate the cost model for one configuration");
  QueryFlags sim_q;
  bool sim_elem_given = false;
  std::uint64_t sim_p_r = 0, sim_p_c = 0;
  add_query_flags(c_sim, sim_q, sim_elem_given);
  c_sim->add_option("--p-r", sim_p_r, "Row partitions")->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--p-c", sim_p_c, "Column partitions")->required()->check(CLI::PositiveNumber);
  c_sim->callback([&] {
    bw::DatasetDescriptor d = dataset_from(sim_q, sim_elem_given);
    bw::AlgorithmDescriptor a = algorithm_from(sim_q);
    bw::EnvironmentDescriptor e = environment_from(sim_q);
    bw::Partitioning part = bw::clamp_partitioning(d, {sim_p_r, sim_p_c});
    bw::TrialTime t =
        bw::simulate_execution(config.cost_models().for_algorithm(a.name), d, e, part);
    if (t.is_failed())
      std::cout << "FAILED\n";
    else
      std::cout << "time=" << bw::format_double(t.seconds()) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1, --help exits 0
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bw::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const bw::ExecutorError& e) {
    std::cerr << "executor error: " << e.what() << "\n";
    return 4;
  } catch (const bw::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
