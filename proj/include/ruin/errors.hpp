#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ruin {

enum class ErrorKind {
  NoSignChange,
  MaxIterations,
  OutOfDomain,
  OutOfRange,
  NoAdjustment,
  NoConjugate,
  UnsupportedDriver,
  BoundaryVelocity,
  BoundaryRay,
  InvalidProportions,
  InvalidModel,
  InvalidHorizon,
  InsufficientConditionedSamples,
  InvalidConfig,
  CrossCheckFailed,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to an exit status without parsing messages.
class RuinError : public std::runtime_error {
 public:
  RuinError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw RuinError(kind, what); }

}  // namespace ruin
