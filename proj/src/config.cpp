#include "blockwise/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + value + "'");
}

std::uint64_t parse_uint(const std::string& value, const std::string& key) {
  std::uint64_t v{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw ConfigError("key '" + key + "' expects an unsigned integer, got '" + value + "'");
  return v;
}

double parse_real(const std::string& value, const std::string& key) {
  double v{};
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
  return v;
}

}  // namespace

CostModelTable Config::cost_models() const {
  CostModelTable table = default_cost_models(seed);
  for (const auto& [algo, params] : cost_model_overrides) {
    CostModelParams resolved = params;
    if (resolved.seed == 0) resolved.seed = splitmix64(seed ^ hash_string(algo));
    table.per_algorithm[algo] = resolved;
  }
  return table;
}

Config Config::load(std::istream& in) {
  Config config;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;

    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      bool known = section == "paths" || section == "gridsearch" || section == "learner" ||
                   section.rfind("cost_model.", 0) == 0;
      if (!known)
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      if (section.rfind("cost_model.", 0) == 0) {
        std::string algo = lowercase(section.substr(std::string("cost_model.").size()));
        if (algo.empty()) throw ConfigError("cost_model section needs an algorithm name");
        // ensure the entry exists even if every key is defaulted
        config.cost_model_overrides.emplace(algo, CostModelParams{});
      }
      continue;
    }

    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");

    auto unknown = [&]() -> ConfigError {
      std::string where = section.empty() ? "top level" : "[" + section + "]";
      return ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "' in " +
                         where);
    };

    if (section.empty()) {
      if (key == "seed") config.seed = parse_uint(value, key);
      else if (key == "strict")
        config.parse_mode = parse_bool(value, key) ? ParseMode::strict : ParseMode::lenient;
      else throw unknown();
    } else if (section == "paths") {
      if (key == "log") config.log_path = value;
      else if (key == "training_set") config.training_path = value;
      else if (key == "model") config.model_path = value;
      else if (key == "grids_dir") config.grids_dir = value;
      else throw unknown();
    } else if (section == "gridsearch") {
      if (key == "step") {
        std::uint64_t v = parse_uint(value, key);
        if (v < 2) throw ConfigError("gridsearch step must be >= 2");
        config.step = static_cast<int>(v);
      } else if (key == "parallelism") {
        std::uint64_t v = parse_uint(value, key);
        if (v < 1) throw ConfigError("parallelism must be >= 1");
        config.parallelism = static_cast<unsigned>(v);
      } else if (key == "include_identity") {
        config.include_identity = parse_bool(value, key);
      } else throw unknown();
    } else if (section == "learner") {
      if (key == "max_depth") config.max_depth = static_cast<std::uint32_t>(parse_uint(value, key));
      else if (key == "min_samples_leaf") {
        std::uint64_t v = parse_uint(value, key);
        if (v < 1) throw ConfigError("min_samples_leaf must be >= 1");
        config.min_samples_leaf = static_cast<std::uint32_t>(v);
      } else if (key == "max_partitions_factor") {
        std::uint64_t v = parse_uint(value, key);
        if (v < 1) throw ConfigError("max_partitions_factor must be >= 1");
        config.max_partitions_factor = static_cast<std::uint32_t>(v);
      } else throw unknown();
    } else {  // cost_model.<algo>
      std::string algo = lowercase(section.substr(std::string("cost_model.").size()));
      CostModelParams& params = config.cost_model_overrides[algo];
      if (key == "t0") {
        params.t0 = parse_real(value, key);
        if (params.t0 < 0) throw ConfigError("t0 must be >= 0");
      } else if (key == "gamma") {
        params.gamma = parse_real(value, key);
        if (params.gamma <= 0) throw ConfigError("gamma must be > 0");
      } else if (key == "delta") {
        params.delta = parse_real(value, key);
        if (params.delta <= 0) throw ConfigError("delta must be > 0");
      } else if (key == "noise_rel") {
        params.noise_rel = parse_real(value, key);
        if (params.noise_rel < 0) throw ConfigError("noise_rel must be >= 0");
      } else if (key == "seed") {
        params.seed = parse_uint(value, key);
      } else throw unknown();
    }
  }
  return config;
}

Config Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open config file " + path.string());
  return load(in);
}

}  // namespace blockwise
