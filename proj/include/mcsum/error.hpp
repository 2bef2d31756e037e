#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcsum {

enum class ErrorKind {
  kContract,        // precondition violated by the caller
  kInfeasible,      // request cannot be satisfied for this input size
  kDegenerateInput, // e.g. zero vector where a direction is required
  kTransport,       // remote provider unreachable after retries
  kProtocol,        // remote provider answered with something unusable
  kIo,
  kParse,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kDegenerateInput: return "degenerate-input";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Error raised from inside run_pipeline; `stage()` names the failing step
// ("chunk", "embed", "cluster", ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.kind(), stage + ": " + inner.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace mcsum
