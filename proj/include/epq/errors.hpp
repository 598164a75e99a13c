#pragma once

#include <stdexcept>
#include <string>

namespace epq {

enum class ErrorCode {
  DimensionMismatch,
  InvalidDimension,
  NotSymmetric,
  NotEnergyPreserving,
  WrongDimension,
  InconsistentParameterization,
  TrivialNonlinearity,
  NotApplicable,
  MaxIterations,
  NotThreeDimensional,
  ParseError,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable code. All library failures that are
/// not numerical outcomes (those are reported as status values) throw this.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace epq
