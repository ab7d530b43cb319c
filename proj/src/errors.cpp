#include "slideagg/errors.hpp"

namespace slideagg {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::WriteFailed: return "WriteFailed";
    case Errc::MalformedModel: return "MalformedModel";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case Errc::DuplicateSlideId: return "DuplicateSlideId";
    case Errc::InvalidTopology: return "InvalidTopology";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::SingleClassDataset: return "SingleClassDataset";
    case Errc::TooFewExamples: return "TooFewExamples";
    case Errc::EmptyEvaluation: return "EmptyEvaluation";
    case Errc::SingleClassScores: return "SingleClassScores";
    case Errc::NotFitted: return "NotFitted";
  }
  return "Unknown";
}

ErrorCategory category(Errc code) {
  switch (code) {
    case Errc::MissingFile:
    case Errc::WriteFailed:
    case Errc::MalformedModel:
      return ErrorCategory::Io;
    case Errc::MalformedRow:
    case Errc::ProbabilityOutOfRange:
    case Errc::DuplicateSlideId:
      return ErrorCategory::Validation;
    default:
      return ErrorCategory::Pipeline;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

RowError::RowError(Errc code, std::string file, std::size_t line, const std::string& detail)
    : Error(code, file + ":" + std::to_string(line) + ": " + detail),
      file_(std::move(file)),
      line_(line) {}

}  // namespace slideagg
