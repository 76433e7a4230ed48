#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "qcurv/fields.hpp"
#include "qcurv/geometry.hpp"

namespace qcurv {

// Conventions (fixed for every number the library produces):
//   Delta = delta d            (nonnegative spectrum)
//   P     = Delta^2 + delta((2/3) R g - 2 Ric) d
//   Q     = (1/6)(Delta R + R^2 - 3 |Ric|^2)
//   g_hat = e^{2w} g:  P_hat = e^{-4w} P,  Q_hat = e^{-4w}(Q + P w)
// On a product of constant-curvature surfaces P is diagonal in the product
// eigenbasis with symbol (mu + nu)^2 + c1 mu + c2 nu, c_i = (2/3) R - R_i.
std::string convention_text();
std::string convention_hash();

struct SymbolCoefficients {
  double c1 = 0;
  double c2 = 0;
};

SymbolCoefficients symbol_coefficients(const CurvatureData& c);
inline double symbol_value(double mu, double nu, const SymbolCoefficients& c) {
  return (mu + nu) * (mu + nu) + c.c1 * mu + c.c2 * nu;
}

/// Constant Q of the background product metric.
double q_background_value(const ProductManifold& m);

inline constexpr const char* kBackgroundTag = "g";
/// Canonical tag of e^{2 omega} g (the background tag when omega is zero).
std::string metric_tag_for(const std::optional<ConformalFactor>& omega);

struct QField {
  ScalarField q;
  std::string metric_tag;
};

QField q_background(const SectorPtr& sector);

/// Galerkin pair of a rescaled operator over the sector basis in the g_hat
/// inner product: stiffness_ij = <phi_i, P_hat phi_j>_hat, gram_ij = <phi_i, phi_j>_hat.
struct DenseForm {
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd gram;
};

inline constexpr Eigen::Index kMaxDenseModes = 3000;

class PaneitzOperator {
 public:
  PaneitzOperator(SectorPtr sector, SymbolCoefficients coeffs, Eigen::VectorXd symbol,
                  std::optional<ConformalFactor> omega, std::optional<DenseForm> dense);

  const Sector& sector() const { return *sector_; }
  const SectorPtr& sector_ptr() const { return sector_; }
  const std::string& metric_tag() const { return tag_; }
  const SymbolCoefficients& coefficients() const { return coeffs_; }
  /// Background eigenvalue of every sector mode.
  const Eigen::VectorXd& symbol() const { return symbol_; }
  bool is_background() const { return !omega_.has_value(); }
  const std::optional<ConformalFactor>& omega() const { return omega_; }
  const std::optional<DenseForm>& dense() const { return dense_; }

  /// P^g f for the background metric g (acts on coefficients).
  ScalarField apply_background(const ScalarField& f) const;
  /// Action of this operator: the background symbol, or e^{-4w} P^g f with
  /// exact point values when rescaled.
  ScalarField apply(const ScalarField& f) const;
  /// max |lambda|, times max e^{-4w} when rescaled.
  double norm() const;
  /// ||A - A^T||_F / ||A||_F of the stiffness (dense operators only).
  double self_adjointness_defect() const;

 private:
  SectorPtr sector_;
  SymbolCoefficients coeffs_;
  Eigen::VectorXd symbol_;
  std::optional<ConformalFactor> omega_;
  std::optional<DenseForm> dense_;
  std::string tag_;
};

PaneitzOperator assemble_background(const SectorPtr& sector);

enum class Materialize { Dense, MatrixFree };

/// P for e^{2 omega} g. A rescaled input composes the factors. Dense
/// materialization throws DenseTooLarge above kMaxDenseModes modes.
PaneitzOperator conformal_paneitz(const PaneitzOperator& p, const ConformalFactor& omega,
                                  Materialize mode = Materialize::Dense);

/// Q for e^{2 omega} g from Q and P of g. The result keeps exact point values.
QField q_transform(const QField& qg, const ConformalFactor& omega, const PaneitzOperator& p,
                   double max_aliasing = kNoAliasingLimit);

}  // namespace qcurv
