#include "qcurv/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qcurv/error.hpp"
#include "qcurv/kernels.hpp"

namespace qcurv {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Factor-1 eigenvalues up to `bound`, ascending (sphere or torus only).
std::vector<double> factor_eigenvalues_below(const FactorSpec& f, double bound) {
  std::vector<double> out;
  if (f.kind() == FactorKind::Sphere2) {
    const double a2 = f.radius() * f.radius();
    for (int l = 0;; ++l) {
      const double mu = l * (l + 1) / a2;
      if (mu > bound) break;
      out.push_back(mu);
    }
  } else if (f.kind() == FactorKind::FlatTorus2) {
    const double w1 = 2 * kPi / f.period1(), w2 = 2 * kPi / f.period2();
    const int k1max = static_cast<int>(std::sqrt(std::max(bound, 0.0)) / w1) + 1;
    const int k2max = static_cast<int>(std::sqrt(std::max(bound, 0.0)) / w2) + 1;
    for (int k1 = 0; k1 <= k1max; ++k1)
      for (int k2 = 0; k2 <= k2max; ++k2) {
        const double mu = w1 * w1 * k1 * k1 + w2 * w2 * k2 * k2;
        if (mu <= bound) out.push_back(mu);
      }
    std::sort(out.begin(), out.end());
  }
  return out;
}

// Smallest positive Laplace eigenvalue of a factor when it is known.
double first_positive_eigenvalue(const FactorSpec& f) {
  switch (f.kind()) {
    case FactorKind::Sphere2:
      return 2.0 / (f.radius() * f.radius());
    case FactorKind::FlatTorus2: {
      const double p = std::max(f.period1(), f.period2());
      return (2 * kPi / p) * (2 * kPi / p);
    }
    case FactorKind::AbstractHyperbolic2:
      return f.spectrum().size() > 1 ? f.spectrum()[1] : 0.0;
  }
  return 0.0;
}

// Orthonormal basis of span(Q) whose first column is the constant mode
// projected into the span (Q orthonormal, n x d).
Eigen::MatrixXd constant_first(const Eigen::MatrixXd& Q) {
  const Eigen::Index d = Q.cols();
  Eigen::VectorXd e0 = Q.row(0).transpose();  // coordinates of e_0's projection
  const double len = e0.norm();
  if (len < 0.5) return Q;
  e0 /= len;
  Eigen::MatrixXd out(Q.rows(), d);
  out.col(0) = Q * e0;
  if (d > 1) {
    const Eigen::MatrixXd rest = Eigen::MatrixXd::Identity(d, d) - e0 * e0.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rest, Eigen::ComputeFullU);
    out.rightCols(d - 1) = Q * svd.matrixU().leftCols(d - 1);
  }
  if (out(0, 0) < 0) out.col(0) *= -1;
  return out;
}

}  // namespace

SpectrumSplit split_spectrum(const Eigen::VectorXd& eigenvalues, double tol, double gap_ratio) {
  if (!(tol > 0)) fail(ErrorCode::InvalidArgument, "kernel tolerance must be positive");
  SpectrumSplit s;
  s.norm = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  s.threshold = tol * s.norm;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double a = std::abs(eigenvalues[i]);
    if (a <= s.threshold)
      s.zero.push_back(i);
    else
      s.gap = std::min(s.gap, a);
  }
  s.certified = s.threshold == 0 || s.gap >= gap_ratio * s.threshold;
  return s;
}

PositivityNote off_sector_positivity(const Sector& sector, const SymbolCoefficients& c) {
  const ProductManifold& m = sector.manifold();
  const FactorSpec& f1 = m.factor1();
  if (!f1.grid_backed())
    return {false, "factor 1 is abstract; no positivity argument available"};
  const double nu_min = first_positive_eigenvalue(m.factor2());
  // For mu >= mu_star, lambda(mu, .) is increasing on nu >= 0 and lambda(mu, 0) >= 0.
  const double mu_star = std::max({0.0, -c.c1, -c.c2 / 2});
  const double mu_trunc = sector.basis1().eigenvalues().maxCoeff();
  std::ostringstream note;
  for (double mu : factor_eigenvalues_below(f1, mu_star)) {
    const double vertex = -(2 * mu + c.c2) / 2;
    double worst = 0;
    double at = 0;
    if (vertex > nu_min) {
      at = vertex;
      worst = mu * mu + c.c1 * mu - (2 * mu + c.c2) * (2 * mu + c.c2) / 4;
    } else if (nu_min > 0) {
      at = nu_min;
      worst = symbol_value(mu, nu_min, c);
    } else {
      // Unknown factor-2 spectrum: need lambda(mu, 0) >= 0 with lambda increasing.
      at = 0;
      worst = symbol_value(mu, 0, c);
      if (worst >= 0) continue;
    }
    if (worst <= 0) {
      note << "not proven: factor-1 eigenvalue mu=" << fmt(mu) << " gives lambda=" << fmt(worst)
           << " at nu=" << fmt(at);
      return {false, note.str()};
    }
  }
  if (mu_trunc < -c.c1) {
    note << "not proven: nu=0 modes above the factor-1 truncation (mu>" << fmt(mu_trunc)
         << ") are not covered; raise the truncation past mu=" << fmt(-c.c1);
    return {false, note.str()};
  }
  note << "lambda(mu,nu)=(mu+nu)^2+" << fmt(c.c1) << "*mu+" << fmt(c.c2)
       << "*nu > 0 for all nu>" << (nu_min > 0 ? "=" + fmt(nu_min) : std::string("0"))
       << ": factor-1 modes with mu<" << fmt(mu_star)
       << " checked individually, larger mu by monotonicity; nu=0 modes above the "
          "truncation positive since mu>" << fmt(-c.c1);
  return {true, note.str()};
}

KernelBasis kernel_basis(const PaneitzOperator& p, double tol, double gap_ratio) {
  const SectorPtr& sp = p.sector_ptr();
  const Sector& s = *sp;
  KernelBasis kb;
  kb.tol = tol;
  kb.metric_tag = p.metric_tag();
  Eigen::MatrixXd vectors;  // columns: coefficient vectors of the kernel basis

  if (p.is_background()) {
    const SpectrumSplit split = split_spectrum(p.symbol(), tol, gap_ratio);
    kb.norm = split.norm;
    kb.threshold = split.threshold;
    kb.gap = split.gap;
    if (!split.certified)
      fail(ErrorCode::IndeterminateGap,
           "smallest nonzero |lambda|=" + fmt(split.gap) + " is within " + fmt(gap_ratio) +
               "x of the zero threshold " + fmt(split.threshold));
    vectors = Eigen::MatrixXd::Zero(s.size(), static_cast<Eigen::Index>(split.zero.size()));
    for (std::size_t j = 0; j < split.zero.size(); ++j)
      vectors(split.zero[j], static_cast<Eigen::Index>(j)) = 1.0;
  } else {
    if (!p.dense()) fail(ErrorCode::InvalidArgument, "kernel_basis needs a dense rescaled operator");
    const DenseForm& d = *p.dense();
    const Eigen::MatrixXd A = 0.5 * (d.stiffness + d.stiffness.transpose());
    const Eigen::MatrixXd B = 0.5 * (d.gram + d.gram.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    if (es.info() != Eigen::Success)
      fail(ErrorCode::IndeterminateGap, "generalized eigensolve failed");
    const SpectrumSplit split = split_spectrum(es.eigenvalues(), tol, gap_ratio);
    kb.norm = split.norm;
    kb.threshold = split.threshold;
    kb.gap = split.gap;
    if (!split.certified)
      fail(ErrorCode::IndeterminateGap,
           "smallest nonzero |sigma|=" + fmt(split.gap) + " is within " + fmt(gap_ratio) +
               "x of the zero threshold " + fmt(split.threshold));
    Eigen::MatrixXd V(s.size(), static_cast<Eigen::Index>(split.zero.size()));
    for (std::size_t j = 0; j < split.zero.size(); ++j)
      V.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(split.zero[j]);
    // Orthonormalize in the background inner product, which is the coefficient
    // dot product for the orthonormal basis.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    vectors = qr.householderQ() * Eigen::MatrixXd::Identity(V.rows(), V.cols());
    vectors = constant_first(vectors);
  }

  kb.dim = static_cast<int>(vectors.cols());
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) kb.fields.emplace_back(sp, vectors.col(j));

  const bool whole = s.kind() == SectorKind::FullProduct && s.grid_backed();
  kb.scope = whole ? "full" : "sector-certified";
  if (!whole) kb.proof_note = off_sector_positivity(s, p.coefficients());
  return kb;
}

double span_distance(const KernelBasis& a, const KernelBasis& b) {
  if (a.dim != b.dim) return std::numeric_limits<double>::infinity();
  if (a.dim == 0) return 0;
  const Eigen::Index n = a.fields.front().coeffs().size();
  Eigen::MatrixXd A(n, a.dim), B(n, b.dim);
  for (int j = 0; j < a.dim; ++j) A.col(j) = a.fields[static_cast<std::size_t>(j)].coeffs();
  for (int j = 0; j < b.dim; ++j) B.col(j) = b.fields[static_cast<std::size_t>(j)].coeffs();
  // sin of the largest principal angle = ||(I - B B^T) A||_2 for orthonormal A, B.
  const Eigen::MatrixXd R = A - B * (B.transpose() * A);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
  return svd.singularValues()[0];
}

StabilityReport check_conformal_stability(const KernelBasis& b, const PaneitzOperator& p_background,
                                          const ConformalFactor& omega, double tol) {
  require_grid(p_background.sector(), "check_conformal_stability");
  StabilityReport r;
  r.tolerance = 10 * tol;
  r.dim_background = b.dim;
  if (omega.is_zero()) {
    r.dim_rescaled = b.dim;
    return r;
  }
  const PaneitzOperator p_hat = conformal_paneitz(p_background, omega, Materialize::Dense);
  const KernelBasis hat = kernel_basis(p_hat, tol);
  r.dim_rescaled = hat.dim;
  const MeasureWeights mu_hat = conformal_measure(omega);
  for (const ScalarField& u : b.fields) {
    const double pu = l2_norm(p_hat.apply(u), mu_hat);
    const double un = l2_norm(u, mu_hat);
    r.max_residual = std::max(r.max_residual, pu / (hat.norm * un));
  }
  if (r.max_residual > r.tolerance || r.dim_rescaled != r.dim_background)
    fail(ErrorCode::StabilityViolation,
         "residual " + fmt(r.max_residual) + " (limit " + fmt(r.tolerance) + "), dim " +
             std::to_string(r.dim_background) + " -> " + std::to_string(r.dim_rescaled));
  return r;
}

ScanResult scan_parameter(const ScanFamily& family, double from, double to, int steps, double tol,
                          double gap_ratio) {
  if (steps < 1) fail(ErrorCode::InvalidArgument, "scan needs at least one step");
  if (family.factor != 1 && family.factor != 2)
    fail(ErrorCode::InvalidArgument, "scan factor must be 1 or 2");
  ScanResult out;
  out.steps.resize(static_cast<std::size_t>(steps));
  kernels::parallel_for(steps, [&](Eigen::Index i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    const double a = from + (to - from) * t;
    const FactorSpec f1 =
        family.factor == 1 ? family.base.factor1().with_size(a) : family.base.factor1();
    const FactorSpec f2 =
        family.factor == 2 ? family.base.factor2().with_size(a) : family.base.factor2();
    const ProductManifold m(f1, f2);
    const SymbolCoefficients c = symbol_coefficients(curvature_scalars(m));
    const FactorBasis b1(f1), b2(f2);
    const int m2 = family.sector == SectorKind::Factor1Only ? 1 : b2.size();
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(b1.size()) * m2);
    for (int i1 = 0; i1 < b1.size(); ++i1)
      for (int i2 = 0; i2 < m2; ++i2)
        lambda[i1 * m2 + i2] = symbol_value(b1.eigenvalue(i1), b2.eigenvalue(i2), c);
    const SpectrumSplit split = split_spectrum(lambda, tol, gap_ratio);
    ScanStep& st = out.steps[static_cast<std::size_t>(i)];
    st.param = a;
    st.dim = static_cast<int>(split.zero.size());
    st.certified = split.certified;
    st.min_abs_lambda = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
      if (lambda[k] < -split.threshold) ++st.negative;
    for (Eigen::Index k = 1; k < lambda.size(); ++k)
      if (std::abs(lambda[k]) < st.min_abs_lambda) {
        st.min_abs_lambda = std::abs(lambda[k]);
        st.nearest_lambda = lambda[k];
      }
    if (lambda.size() < 2) st.min_abs_lambda = 0;
  });
  for (std::size_t i = 1; i < out.steps.size(); ++i) {
    const ScanStep& lo = out.steps[i - 1];
    const ScanStep& hi = out.steps[i];
    if (lo.dim != hi.dim) {
      out.brackets.push_back({lo.param, hi.param, lo.dim, hi.dim, "dim-change"});
    } else if (lo.negative != hi.negative) {
      out.brackets.push_back({lo.param, hi.param, lo.dim, hi.dim, "sign-change"});
    }
  }
  return out;
}

}  // namespace qcurv
