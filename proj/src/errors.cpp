#include "epq/errors.hpp"

namespace epq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotEnergyPreserving: return "NotEnergyPreserving";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::InconsistentParameterization: return "InconsistentParameterization";
    case ErrorCode::TrivialNonlinearity: return "TrivialNonlinearity";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NotThreeDimensional: return "NotThreeDimensional";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace epq
