#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blockwise {

// Error families. The CLI maps them to exit codes: InputError -> 2,
// ModelError -> 3, ExecutorError -> 4 (usage errors are 1).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ExecutorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PartitionExceedsDimension : InputError {
  using InputError::InputError;
};

struct InvalidField : InputError {
  InvalidField(const std::string& field, const std::string& reason)
      : InputError("invalid field '" + field + "': " + reason), field(field) {}
  std::string field;
};

struct MalformedRecord : InputError {
  MalformedRecord(std::size_t line_no, const std::string& reason)
      : InputError("malformed record at line " + std::to_string(line_no) + ": " + reason),
        line_no(line_no) {}
  std::size_t line_no;
};

struct IoFailure : InputError {
  using InputError::InputError;
};

struct ConfigError : InputError {
  using InputError::InputError;
};

struct InvalidStep : InputError {
  using InputError::InputError;
};

struct NonPositiveTime : InputError {
  using InputError::InputError;
};

struct AllFailed : InputError {
  using InputError::InputError;
};

struct AllCellsFailed : ExecutorError {
  using ExecutorError::ExecutorError;
};

struct EmptyTrainingSet : ModelError {
  using ModelError::ModelError;
};

struct VersionMismatch : ModelError {
  using ModelError::ModelError;
};

struct CorruptModel : ModelError {
  using ModelError::ModelError;
};

struct ModelNotFitted : ModelError {
  using ModelError::ModelError;
};

}  // namespace blockwise
