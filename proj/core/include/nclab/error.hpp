#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nclab {

enum class ErrorKind {
  // model validation
  NotSorted,
  DimensionMismatch,
  NotStabilizable,
  StableEigenvalue,
  InvalidChannel,
  // conditions
  CapExceeded,
  Infeasible,
  OrderViolation,
  DivergentMoment,
  NoRoot,
  DegenerateEqualMagnitudes,
  // channel
  EmptyAudit,
  // sched
  ConfigError,
  // control
  NotControllable,
  UnstableGain,
  // sim
  UnsupportedSystem,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Numerical failures (no root, quota cap, divergent moments) as opposed to bad input.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nclab
