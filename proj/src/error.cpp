#include "spatialbias/error.hpp"

namespace spatialbias {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::MissingAdjacency: return "MissingAdjacency";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ConstantFeature: return "ConstantFeature";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::DegenerateGroups: return "DegenerateGroups";
    case ErrorCode::UndefinedRatio: return "UndefinedRatio";
    case ErrorCode::DegenerateBootstrap: return "DegenerateBootstrap";
    case ErrorCode::IOError: return "IOError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::JoinError: return "JoinError";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace spatialbias
