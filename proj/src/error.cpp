#include "qcurv/error.hpp"

#include <cstdio>

namespace qcurv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::AbstractFactorNotGridBacked: return "AbstractFactorNotGridBacked";
    case ErrorCode::SectorMismatch: return "SectorMismatch";
    case ErrorCode::AliasingExceeded: return "AliasingExceeded";
    case ErrorCode::DenseTooLarge: return "DenseTooLarge";
    case ErrorCode::IndeterminateGap: return "IndeterminateGap";
    case ErrorCode::StabilityViolation: return "StabilityViolation";
    case ErrorCode::NotInKernel: return "NotInKernel";
    case ErrorCode::KQZero: return "KQZero";
    case ErrorCode::NotConstantQ: return "NotConstantQ";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::FredholmViolation: return "FredholmViolation";
    case ErrorCode::SignMismatch: return "SignMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace qcurv
