#include "ruin/errors.hpp"

namespace ruin {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NoAdjustment: return "NoAdjustment";
    case ErrorKind::NoConjugate: return "NoConjugate";
    case ErrorKind::UnsupportedDriver: return "UnsupportedDriver";
    case ErrorKind::BoundaryVelocity: return "BoundaryVelocity";
    case ErrorKind::BoundaryRay: return "BoundaryRay";
    case ErrorKind::InvalidProportions: return "InvalidProportions";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::InvalidHorizon: return "InvalidHorizon";
    case ErrorKind::InsufficientConditionedSamples: return "InsufficientConditionedSamples";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::CrossCheckFailed: return "CrossCheckFailed";
  }
  return "Unknown";
}

}  // namespace ruin
