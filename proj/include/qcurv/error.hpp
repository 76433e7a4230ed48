#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcurv {

enum class ErrorCode {
  InvalidArgument,
  ConfigError,
  AbstractFactorNotGridBacked,
  SectorMismatch,
  AliasingExceeded,
  DenseTooLarge,
  IndeterminateGap,
  StabilityViolation,
  NotInKernel,
  KQZero,
  NotConstantQ,
  ConstantInput,
  FredholmViolation,
  SignMismatch,
  NonConvergence,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure the library reports. The code lets
/// callers (and the CLI exit-code mapping) branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Short scientific form for magnitudes in messages.
std::string sci(double v);

}  // namespace qcurv
