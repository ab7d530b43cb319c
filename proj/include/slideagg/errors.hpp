#pragma once

#include <stdexcept>
#include <string>

namespace slideagg {

enum class Errc {
  MissingFile,
  WriteFailed,
  MalformedModel,
  MalformedRow,
  ProbabilityOutOfRange,
  DuplicateSlideId,
  InvalidTopology,
  ShapeMismatch,
  InvalidConfig,
  EmptyDataset,
  SingleClassDataset,
  TooFewExamples,
  EmptyEvaluation,
  SingleClassScores,
  NotFitted,
};

// Coarse grouping used to choose a process exit status.
enum class ErrorCategory { Io, Validation, Pipeline };

const char* to_string(Errc code);
ErrorCategory category(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Row-level parse failure; line numbers are 1-based and count the header.
class RowError : public Error {
 public:
  RowError(Errc code, std::string file, std::size_t line, const std::string& detail);
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace slideagg
