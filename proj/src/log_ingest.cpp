#include "blockwise/log_ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "blockwise/errors.hpp"
#include "blockwise/text_util.hpp"

namespace blockwise {

namespace {

constexpr std::size_t kFieldCount = 14;  // without extras

std::uint64_t positive_u64(std::string_view token, const char* name, std::size_t line_no) {
  std::uint64_t v = parse_u64(token, name, line_no);
  if (v == 0) throw InvalidField(name, "must be >= 1");
  return v;
}

}  // namespace

ExecutionRecord parse_record(std::string_view line, std::size_t line_no) {
  auto fields = split_tabs(line);
  if (fields.size() < kFieldCount)
    throw MalformedRecord(line_no, "expected at least " + std::to_string(kFieldCount) +
                                       " tab-separated fields, got " + std::to_string(fields.size()));
  if (fields[0] != "v1")
    throw MalformedRecord(line_no, "unknown format version '" + std::string(fields[0]) + "'");

  ExecutionRecord rec;

  rec.algorithm.name = lowercase(fields[1]);
  if (rec.algorithm.name.empty()) throw InvalidField("algo_name", "must be nonempty");
  rec.algorithm.task_kind = task_kind_from_string(fields[2]);
  rec.algorithm.mode = run_mode_from_string(fields[3]);

  rec.dataset.rows = positive_u64(fields[4], "rows", line_no);
  rec.dataset.cols = positive_u64(fields[5], "cols", line_no);
  rec.dataset.size_bytes = parse_u64(fields[6], "size_bytes", line_no);
  if (fields[7] == "-") {
    rec.dataset.element_bytes = 8;
    rec.dataset.element_bytes_known = false;
  } else {
    std::uint64_t eb = positive_u64(fields[7], "elem_bytes", line_no);
    if (eb > 0xffffffffULL) throw InvalidField("elem_bytes", "implausibly large");
    rec.dataset.element_bytes = static_cast<std::uint32_t>(eb);
    rec.dataset.element_bytes_known = true;
  }

  // Size consistency is checked only when both size and element width were
  // recorded; logs that carry a compressed on-disk footprint omit elem_bytes.
  if (rec.dataset.element_bytes_known && rec.dataset.size_bytes != 0) {
    double expected = static_cast<double>(rec.dataset.rows) *
                      static_cast<double>(rec.dataset.cols) * rec.dataset.element_bytes;
    double actual = static_cast<double>(rec.dataset.size_bytes);
    if (std::abs(actual - expected) > 0.01 * expected)
      throw InvalidField("size_bytes",
                         "differs from rows*cols*elem_bytes by more than 1% (" +
                             format_double(actual) + " vs " + format_double(expected) + ")");
  }

  std::uint64_t nodes = positive_u64(fields[8], "nodes", line_no);
  std::uint64_t cores = positive_u64(fields[9], "cores_per_node", line_no);
  if (nodes > 0xffffffffULL) throw InvalidField("nodes", "implausibly large");
  if (cores > 0xffffffffULL) throw InvalidField("cores_per_node", "implausibly large");
  rec.environment.nodes = static_cast<std::uint32_t>(nodes);
  rec.environment.cores_per_node = static_cast<std::uint32_t>(cores);
  rec.environment.ram_per_node_bytes = positive_u64(fields[10], "ram_per_node_bytes", line_no);

  rec.partitioning.p_r = positive_u64(fields[11], "p_r", line_no);
  rec.partitioning.p_c = positive_u64(fields[12], "p_c", line_no);

  if (fields[13] == "FAILED") {
    rec.time = TrialTime::failed();
  } else {
    rec.time = TrialTime::of_seconds(parse_double(fields[13], "time_seconds", line_no));
  }

  if (fields.size() > kFieldCount) {
    std::string extras;
    for (std::size_t i = kFieldCount; i < fields.size(); ++i) {
      if (i > kFieldCount) extras += '\t';
      extras += fields[i];
    }
    rec.extras = std::move(extras);
  }
  return rec;
}

std::string serialize_record(const ExecutionRecord& rec) {
  std::string out = "v1";
  auto add = [&out](const std::string& s) {
    out += '\t';
    out += s;
  };
  add(rec.algorithm.name);
  add(to_string(rec.algorithm.task_kind));
  add(to_string(rec.algorithm.mode));
  add(std::to_string(rec.dataset.rows));
  add(std::to_string(rec.dataset.cols));
  add(std::to_string(rec.dataset.size_bytes));
  add(rec.dataset.element_bytes_known ? std::to_string(rec.dataset.element_bytes) : "-");
  add(std::to_string(rec.environment.nodes));
  add(std::to_string(rec.environment.cores_per_node));
  add(std::to_string(rec.environment.ram_per_node_bytes));
  add(std::to_string(rec.partitioning.p_r));
  add(std::to_string(rec.partitioning.p_c));
  add(rec.time.is_failed() ? "FAILED" : format_double(rec.time.seconds()));
  if (!rec.extras.empty()) add(rec.extras);
  return out;
}

IngestResult ingest_stream(std::istream& in, ParseMode mode) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      result.records.push_back(parse_record(line, line_no));
    } catch (const InputError&) {
      if (mode == ParseMode::strict) throw;
      ++result.skipped_malformed;
    }
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& file, ParseMode mode) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoFailure("cannot open log file " + file.string());
  return ingest_stream(in, mode);
}

}  // namespace blockwise
