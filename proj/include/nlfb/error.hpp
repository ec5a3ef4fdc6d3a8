#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlfb {

enum class ErrorKind {
  NoPositiveEquilibrium,
  WindowOutOfGrid,
  NegativeField,
  StabilityViolation,
  GridExhausted,
  NoConvergence,
  SandwichMismatch,
  RegimeError,
  InconsistentEvidence,
  UndecidedRun,
  MissingDiagnostics,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoPositiveEquilibrium: return "NoPositiveEquilibrium";
    case ErrorKind::WindowOutOfGrid: return "WindowOutOfGrid";
    case ErrorKind::NegativeField: return "NegativeField";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::GridExhausted: return "GridExhausted";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SandwichMismatch: return "SandwichMismatch";
    case ErrorKind::RegimeError: return "RegimeError";
    case ErrorKind::InconsistentEvidence: return "InconsistentEvidence";
    case ErrorKind::UndecidedRun: return "UndecidedRun";
    case ErrorKind::MissingDiagnostics: return "MissingDiagnostics";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can echo a structured error and pick an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlfb
