#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spatialbias {

enum class ErrorCode {
  InvalidArgument,
  ShapeError,
  DegenerateGeometry,
  MissingAdjacency,
  ZeroMatrix,
  NumericalFailure,
  SingularSystem,
  ConstantFeature,
  InvalidDelta,
  WrongFamily,
  WrongKind,
  DegenerateGroups,
  UndefinedRatio,
  DegenerateBootstrap,
  IOError,
  SchemaError,
  JoinError,
  TypeError,
  UsageError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the audit pipeline in particular) can record it as a cell marker.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace spatialbias
