#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace blockwise {

std::vector<std::string_view> split_tabs(std::string_view line);

std::string lowercase(std::string_view s);

// Shortest decimal form that parses back to the same double. Used everywhere a
// float is persisted so that written artifacts are byte-stable.
std::string format_double(double v);

// Fixed significant-digit form (printf %.*g), for report tables.
std::string format_sig(double v, int digits);

// Strict numeric parsers: the whole token must be consumed.
// On failure they throw MalformedRecord(line_no, ...).
double parse_double(std::string_view token, const std::string& what, std::size_t line_no = 0);
std::uint64_t parse_u64(std::string_view token, const std::string& what, std::size_t line_no = 0);
std::int64_t parse_i64(std::string_view token, const std::string& what, std::size_t line_no = 0);

std::string read_file(const std::filesystem::path& path);  // throws IoFailure

// Write via temp file + rename so an interrupted run never leaves a
// half-written artifact.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// SplitMix64; used for seed derivation and the simulator's noise draws.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
std::uint64_t hash_string(std::string_view s);

}  // namespace blockwise
