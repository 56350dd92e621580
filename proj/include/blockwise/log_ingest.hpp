#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "blockwise/domain.hpp"

namespace blockwise {

// Log line format v1, tab-separated, one record per line:
//   v1 <algo> <task_kind> <mode> <rows> <cols> <size_bytes> <elem_bytes>
//      <nodes> <cores_per_node> <ram_per_node_bytes> <p_r> <p_c>
//      <time_seconds|FAILED> [extras...]
// '#' starts a comment line, blank lines are skipped, '-' in the elem_bytes
// column means "not recorded" (defaults to 8, size check skipped).

enum class ParseMode { lenient, strict };

struct IngestResult {
  std::vector<ExecutionRecord> records;
  std::size_t skipped_malformed = 0;  // lenient mode only
};

/// Parse one log line. `line_no` is used in error messages only.
/// Throws MalformedRecord for syntax errors, InvalidField for domain
/// violations (p_r = 0, inconsistent size_bytes, ...).
ExecutionRecord parse_record(std::string_view line, std::size_t line_no = 0);

std::string serialize_record(const ExecutionRecord& rec);

IngestResult ingest_stream(std::istream& in, ParseMode mode = ParseMode::lenient);
IngestResult ingest(const std::filesystem::path& file, ParseMode mode = ParseMode::lenient);

}  // namespace blockwise
