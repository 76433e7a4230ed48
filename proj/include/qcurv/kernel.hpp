#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcurv/fields.hpp"
#include "qcurv/paneitz.hpp"

namespace qcurv {

inline constexpr double kDefaultKernelTol = 1e-9;
inline constexpr double kDefaultGapRatio = 1e3;

/// Zero modes of a spectrum: |lambda| <= tol * max|lambda|. The split is
/// certified when the smallest retained nonzero |lambda| exceeds the
/// threshold by `gap_ratio`.
struct SpectrumSplit {
  std::vector<Eigen::Index> zero;
  double norm = 0;
  double threshold = 0;
  double gap = std::numeric_limits<double>::infinity();
  bool certified = true;
};

SpectrumSplit split_spectrum(const Eigen::VectorXd& eigenvalues, double tol, double gap_ratio);

/// Whether lambda(mu, nu) > 0 holds for every mode the sector leaves out
/// (nu > 0, and nu = 0 modes above the factor-1 truncation).
struct PositivityNote {
  bool proven = false;
  std::string text;
};

PositivityNote off_sector_positivity(const Sector& sector, const SymbolCoefficients& c);

/// Orthonormal (background inner product) basis of N(P).
struct KernelBasis {
  std::vector<ScalarField> fields;
  int dim = 0;
  double tol = 0;
  double norm = 0;
  double threshold = 0;
  double gap = 0;
  /// "full" when the sector is the whole truncated space, "sector-certified"
  /// otherwise; `proof_note` then says whether the remaining modes are
  /// provably nonzero.
  std::string scope;
  PositivityNote proof_note;
  std::string metric_tag;
};

/// Diagonal read-off for background operators, generalized symmetric
/// eigensolve (stiffness vs g_hat Gram) for dense rescaled operators.
/// Throws IndeterminateGap when the gap condition fails.
KernelBasis kernel_basis(const PaneitzOperator& p, double tol = kDefaultKernelTol,
                         double gap_ratio = kDefaultGapRatio);

/// Largest sine of the principal angles between the two spans (coefficient
/// space); infinity when dimensions differ.
double span_distance(const KernelBasis& a, const KernelBasis& b);

struct StabilityReport {
  double max_residual = 0;
  double tolerance = 0;
  int dim_background = 0;
  int dim_rescaled = 0;
};

/// max over u in b of ||P_hat u||_hat / (||P_hat|| ||u||_hat) and the
/// dimension of N(P_hat) recomputed from the dense rescaled operator.
/// Throws StabilityViolation when the residual exceeds 10 tol or the
/// dimensions disagree.
StabilityReport check_conformal_stability(const KernelBasis& b, const PaneitzOperator& p_background,
                                          const ConformalFactor& omega,
                                          double tol = kDefaultKernelTol);

struct ScanFamily {
  ProductManifold base;
  int factor = 1;  // which factor's size parameter varies
  SectorKind sector = SectorKind::FullProduct;
};

struct ScanStep {
  double param = 0;
  int dim = 0;
  double min_abs_lambda = 0;  // over non-constant modes
  double nearest_lambda = 0;  // signed eigenvalue attaining min_abs_lambda
  int negative = 0;           // number of negative eigenvalues
  bool certified = true;
};

struct ScanBracket {
  double lo = 0;
  double hi = 0;
  int dim_lo = 0;
  int dim_hi = 0;
  std::string kind;  // "dim-change" or "sign-change" (negative count changed)
};

struct ScanResult {
  std::vector<ScanStep> steps;
  std::vector<ScanBracket> brackets;
};

/// Background-symbol kernel dimension along param in [from, to] with `steps`
/// evenly spaced samples (steps == 1 evaluates `from` only).
ScanResult scan_parameter(const ScanFamily& family, double from, double to, int steps,
                          double tol = kDefaultKernelTol, double gap_ratio = kDefaultGapRatio);

}  // namespace qcurv
