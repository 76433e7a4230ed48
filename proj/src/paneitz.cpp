#include "qcurv/paneitz.hpp"

#include <cmath>

#include "qcurv/error.hpp"
#include "qcurv/hash.hpp"

namespace qcurv {

std::string convention_text() {
  return "Delta=delta d (nonnegative); P=Delta^2+delta((2/3)R g-2Ric)d; "
         "Q=(1/6)(Delta R+R^2-3|Ric|^2); g_hat=e^{2w}g: P_hat=e^{-4w}P, "
         "Q_hat=e^{-4w}(Q+Pw); mu_hat=e^{4w}mu";
}

std::string convention_hash() { return hex64(fnv1a(convention_text())); }

SymbolCoefficients symbol_coefficients(const CurvatureData& c) {
  return {(2.0 / 3.0) * c.R - c.R1, (2.0 / 3.0) * c.R - c.R2};
}

double q_background_value(const ProductManifold& m) {
  const CurvatureData c = curvature_scalars(m);
  // Delta R vanishes on constant-curvature products.
  return (c.R * c.R - 3 * c.ricci_norm_sq) / 6.0;
}

std::string metric_tag_for(const std::optional<ConformalFactor>& omega) {
  if (!omega || omega->is_zero()) return kBackgroundTag;
  return std::string(kBackgroundTag) + "*exp(2w:" + hex64(fnv1a(omega->omega().coeffs())) + ")";
}

QField q_background(const SectorPtr& sector) {
  return {ScalarField::constant(sector, q_background_value(sector->manifold())), kBackgroundTag};
}

PaneitzOperator::PaneitzOperator(SectorPtr sector, SymbolCoefficients coeffs,
                                 Eigen::VectorXd symbol, std::optional<ConformalFactor> omega,
                                 std::optional<DenseForm> dense)
    : sector_(std::move(sector)),
      coeffs_(coeffs),
      symbol_(std::move(symbol)),
      omega_(std::move(omega)),
      dense_(std::move(dense)),
      tag_(metric_tag_for(omega_)) {}

ScalarField PaneitzOperator::apply_background(const ScalarField& f) const {
  require_same_sector(*sector_, f.sector(), "PaneitzOperator::apply");
  return ScalarField(f.sector_ptr(), symbol_.cwiseProduct(f.coeffs()));
}

ScalarField PaneitzOperator::apply(const ScalarField& f) const {
  ScalarField pf = apply_background(f);
  if (!omega_) return pf;
  PointValues p = point_values(pf);
  p.nodal = p.nodal.cwiseProduct(omega_->exp_nodal(-4.0));
  p.check = p.check.cwiseProduct(omega_->exp_check(-4.0));
  return from_point_values(f.sector_ptr(), std::move(p));
}

double PaneitzOperator::norm() const {
  const double base = symbol_.size() ? symbol_.cwiseAbs().maxCoeff() : 0.0;
  if (!omega_) return base;
  return base * omega_->exp_nodal(-4.0).maxCoeff();
}

double PaneitzOperator::self_adjointness_defect() const {
  if (!dense_) fail(ErrorCode::InvalidArgument, "operator has no dense form");
  const Eigen::MatrixXd& A = dense_->stiffness;
  const double n = A.norm();
  return n > 0 ? (A - A.transpose()).norm() / n : 0.0;
}

PaneitzOperator assemble_background(const SectorPtr& sector) {
  const SymbolCoefficients c = symbol_coefficients(curvature_scalars(sector->manifold()));
  Eigen::VectorXd lambda(sector->size());
  for (Eigen::Index i = 0; i < sector->size(); ++i)
    lambda[i] = symbol_value(sector->mu(i), sector->nu(i), c);
  return PaneitzOperator(sector, c, std::move(lambda), std::nullopt, std::nullopt);
}

PaneitzOperator conformal_paneitz(const PaneitzOperator& p, const ConformalFactor& omega,
                                  Materialize mode) {
  require_same_sector(p.sector(), omega.sector(), "conformal_paneitz");
  ConformalFactor total =
      p.omega() ? compose(*p.omega(), omega, kNoAliasingLimit) : omega;
  std::optional<DenseForm> dense;
  if (mode == Materialize::Dense) {
    const Sector& s = p.sector();
    if (s.size() > kMaxDenseModes)
      fail(ErrorCode::DenseTooLarge, "sector has " + std::to_string(s.size()) +
                                         " modes; dense assembly is limited to " +
                                         std::to_string(kMaxDenseModes));
    const RowMatrix phi = s.dense_table();
    const Eigen::VectorXd up = total.exp_nodal(4.0);
    const Eigen::VectorXd down = total.exp_nodal(-4.0);
    const Eigen::VectorXd w_hat = s.weights().cwiseProduct(up);
    // Column j of P_hat phi_j on the nodes: e^{-4w} lambda_j phi_j.
    const RowMatrix action = down.asDiagonal() * phi * p.symbol().asDiagonal();
    dense = DenseForm{kernels::weighted_gram(phi, w_hat, action),
                      kernels::weighted_gram(phi, w_hat, phi)};
  }
  return PaneitzOperator(p.sector_ptr(), p.coefficients(), p.symbol(), std::move(total),
                         std::move(dense));
}

QField q_transform(const QField& qg, const ConformalFactor& omega, const PaneitzOperator& p,
                   double max_aliasing) {
  if (qg.metric_tag != p.metric_tag())
    fail(ErrorCode::InvalidArgument, "q_transform: Q is tagged " + qg.metric_tag +
                                         " but P is tagged " + p.metric_tag());
  require_same_sector(qg.q.sector(), omega.sector(), "q_transform");
  const PointValues q = point_values(qg.q);
  const PointValues pw = point_values(p.apply(omega.omega()));
  PointValues out{omega.exp_nodal(-4.0).cwiseProduct(q.nodal + pw.nodal),
                  omega.exp_check(-4.0).cwiseProduct(q.check + pw.check)};
  ScalarField field = from_point_values(qg.q.sector_ptr(), std::move(out));
  if (field.aliasing() > max_aliasing)
    fail(ErrorCode::AliasingExceeded,
         "Q_hat aliasing " + sci(field.aliasing()) + " exceeds limit");
  std::optional<ConformalFactor> total =
      p.omega() ? std::optional<ConformalFactor>(compose(*p.omega(), omega, kNoAliasingLimit))
                : std::optional<ConformalFactor>(omega);
  return {std::move(field), metric_tag_for(total)};
}

}  // namespace qcurv
