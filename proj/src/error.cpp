#include "eegpref/error.hpp"

namespace eegpref {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::LengthTooSmall: return "LengthTooSmall";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::BadBalance: return "BadBalance";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::NonFinitePoint: return "NonFinitePoint";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace eegpref
