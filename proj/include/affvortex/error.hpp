#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affvortex {

enum class ErrorCode {
  InvalidInput,
  ParseError,
  RootFindingFailed,
  NewtonStalled,
  LinearSolveFailed,
  BoundaryInvalid,
  OracleDiverged,
  DerivativeMismatch,
  EvInfMismatch,
  InconclusiveTrend,
  EmptyW,
  MixedN,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RootFindingFailed: return "RootFindingFailed";
    case ErrorCode::NewtonStalled: return "NewtonStalled";
    case ErrorCode::LinearSolveFailed: return "LinearSolveFailed";
    case ErrorCode::BoundaryInvalid: return "BoundaryInvalid";
    case ErrorCode::OracleDiverged: return "OracleDiverged";
    case ErrorCode::DerivativeMismatch: return "DerivativeMismatch";
    case ErrorCode::EvInfMismatch: return "EvInfMismatch";
    case ErrorCode::InconclusiveTrend: return "InconclusiveTrend";
    case ErrorCode::EmptyW: return "EmptyW";
    case ErrorCode::MixedN: return "MixedN";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// front-ends can map it onto exit statuses without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace affvortex
