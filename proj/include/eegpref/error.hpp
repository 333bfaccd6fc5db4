#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegpref {

// Every failure raised by the library carries one of these codes so callers
// (and the CLI's exit-code mapping) can branch without parsing messages.
enum class ErrorCode {
  EmptyDataset,
  ParseError,
  DuplicateId,
  IoFailure,
  LengthTooSmall,
  NonFiniteInput,
  SignalTooShort,
  BadBalance,
  TooShort,
  SolverFailure,
  EmptyPool,
  MissingClass,
  BadDims,
  ShapeMismatch,
  NonFiniteActivation,
  LengthMismatch,
  EmptyTrainSet,
  DivergenceDetected,
  VersionMismatch,
  CorruptFile,
  BadFraction,
  ClassTooSmall,
  NonFinitePoint,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace eegpref
