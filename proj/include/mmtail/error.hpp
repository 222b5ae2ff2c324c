#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmtail {

enum class ErrorCode {
  InvalidModel,
  InvalidTiming,
  Overflow,
  NotMetzler,
  NotIrreducible,
  NonRealDominant,
  NoSolution,
  DegenerateTarget,
  NonPositiveXi,
  NonPositiveScale,
  EmptyInput,
  ShapeCapExceeded,
  DomainViolation,
  InsufficientData,
  DegenerateSpread,
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// NoSolution carries the value of the spectral function at the bracket cap.
class NoSolutionError : public Error {
 public:
  NoSolutionError(double g_at_cap, double target, double alpha_max);

  double g_at_cap() const noexcept { return g_at_cap_; }
  double target() const noexcept { return target_; }
  double alpha_max() const noexcept { return alpha_max_; }

 private:
  double g_at_cap_;
  double target_;
  double alpha_max_;
};

}  // namespace mmtail
