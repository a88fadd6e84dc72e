#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcp {

enum class ErrorCode {
  InvalidArgument,
  DegenerateBasis,
  DegeneratePair,
  EmptySet,
  TooFewPoints,
  TooLarge,
  SizeMismatch,
  OverlappingSets,
  NoCongruentTriplets,
  NoCandidatePairs,
  DegreeTooSmall,
  ConstructionFailed,
  SpecInfeasible,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::OverlappingSets: return "OverlappingSets";
    case ErrorCode::NoCongruentTriplets: return "NoCongruentTriplets";
    case ErrorCode::NoCandidatePairs: return "NoCandidatePairs";
    case ErrorCode::DegreeTooSmall: return "DegreeTooSmall";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::SpecInfeasible: return "SpecInfeasible";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Library exception; `code()` is the machine-readable reason surfaced by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lcp
