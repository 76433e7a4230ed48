#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcurv/error.hpp"
#include "qcurv/qfunctional.hpp"

namespace qcurv {

struct IterationRecord {
  int iteration = 0;
  double residual = 0;         // sup |Q - target| / |target|
  double step = 0;             // sup |omega_{k+1} - omega_k| on the grid
  double kernel_component = 0; // projected-out N(P) part of the right side, relative
};

struct PrescriptionResult {
  /// Conformal factor relative to the context metric.
  ConformalFactor omega;
  double residual = 0;  // sup |Q_new - target|
  double target = 0;
  int iterations = 0;
  Eigen::VectorXd fredholm;  // int Q u dmu over the kernel basis
  double fredholm_tolerance = 0;
  std::vector<IterationRecord> trace;
};

/// Raised when Q is not orthogonal to N(P): no Q-flat metric in the class
/// (or no constant-Q fixed point of the projected iteration).
class FredholmViolation : public Error {
 public:
  FredholmViolation(const std::string& message, Eigen::VectorXd integrals, double against_one,
                    double tolerance);
  const Eigen::VectorXd& integrals() const { return integrals_; }
  double integral_against_one() const { return against_one_; }
  double tolerance() const { return tolerance_; }

 private:
  Eigen::VectorXd integrals_;
  double against_one_;
  double tolerance_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& message, std::vector<IterationRecord> trace);
  const std::vector<IterationRecord>& trace() const { return trace_; }

 private:
  std::vector<IterationRecord> trace_;
};

/// Fredholm integrals int Q u dmu over the kernel basis and the tolerance
/// they are judged against.
struct FredholmCheck {
  Eigen::VectorXd integrals;
  double tolerance = 0;
  double against_one = 0;
  bool satisfied = false;
};

FredholmCheck fredholm_check(const QContext& ctx);

/// Solves P omega = -Q for the context metric, omega orthogonal to N(P) in
/// its measure. Throws FredholmViolation when Q is not orthogonal to N(P).
PrescriptionResult solve_q_flat(const QContext& ctx);

struct ConstantQOptions {
  double damping = 0.5;
  int max_iter = 200;
  double rel_tol = 1e-5;
  /// Stagnation threshold on the iterate update, relative to sup |omega|.
  double stall_tol = 1e-13;
};

/// Damped fixed point for Q = target with kernel-projected solves and
/// volume renormalization. Throws SignMismatch, NonConvergence or
/// FredholmViolation.
PrescriptionResult iterate_constant_q(const QContext& ctx, double target,
                                      const ConstantQOptions& opts = {});

}  // namespace qcurv
