#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace factcg {

enum class ErrorKind {
  kEmptyGraph,
  kInvalidTriple,
  kContractViolation,
  kCyclicGraph,
  kMissingSlot,
  kUnknownTemplate,
  kAllRejected,
  kEmptyCompletion,
  kBackendUnavailable,
  kBackendError,
  kCorruptionFailed,
  kPrecondition,
  kEmptyDocument,
  kScoringFailed,
  kDegenerateClassBalance,
  kConfig,
  kIo,
  kData,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyGraph: return "EmptyGraph";
    case ErrorKind::kInvalidTriple: return "InvalidTriple";
    case ErrorKind::kContractViolation: return "ContractViolation";
    case ErrorKind::kCyclicGraph: return "CyclicGraph";
    case ErrorKind::kMissingSlot: return "MissingSlot";
    case ErrorKind::kUnknownTemplate: return "UnknownTemplate";
    case ErrorKind::kAllRejected: return "AllRejected";
    case ErrorKind::kEmptyCompletion: return "EmptyCompletion";
    case ErrorKind::kBackendUnavailable: return "BackendUnavailable";
    case ErrorKind::kBackendError: return "BackendError";
    case ErrorKind::kCorruptionFailed: return "CorruptionFailed";
    case ErrorKind::kPrecondition: return "PreconditionFailed";
    case ErrorKind::kEmptyDocument: return "EmptyDocument";
    case ErrorKind::kScoringFailed: return "ScoringFailed";
    case ErrorKind::kDegenerateClassBalance: return "DegenerateClassBalance";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kData: return "DataError";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so callers (pipelines,
// the CLI) can count drops per reason or map to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, int status = 0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        status_(status) {}

  ErrorKind kind() const noexcept { return kind_; }
  // HTTP status for kBackendError, 0 otherwise.
  int status() const noexcept { return status_; }

 private:
  ErrorKind kind_;
  int status_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace factcg
