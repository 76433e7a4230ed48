#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qcurv {

enum class FactorKind { Sphere2, FlatTorus2, AbstractHyperbolic2 };

std::string to_string(FactorKind kind);
FactorKind factor_kind_from_string(const std::string& name);

/// A closed constant-curvature surface together with its spectral truncation.
///
/// Sphere2 carries a radius and a maximal harmonic degree; FlatTorus2 two
/// periods and a maximal Fourier index per axis. AbstractHyperbolic2 is never
/// discretized: it is described by its curvature scale b (Gauss curvature
/// -1/b^2), its genus and optionally the bottom of its Laplace spectrum.
/// Instances are only produced through the validating factories.
class FactorSpec {
 public:
  static FactorSpec sphere(double radius, int lmax);
  static FactorSpec torus(double period1, double period2, int kmax);
  /// `modes` is the number of spectrum entries used; 0 means "all supplied"
  /// (or just the constant mode when no spectrum is given).
  static FactorSpec hyperbolic(double scale, int genus, std::vector<double> spectrum = {},
                               int modes = 0);

  FactorKind kind() const { return kind_; }
  double radius() const { return p1_; }
  double period1() const { return p1_; }
  double period2() const { return p2_; }
  double scale() const { return p1_; }
  int genus() const { return genus_; }
  const std::vector<double>& spectrum() const { return spectrum_; }
  /// lmax for spheres, kmax for tori, spectrum entries used for abstract factors.
  int truncation() const { return truncation_; }

  bool grid_backed() const { return kind_ != FactorKind::AbstractHyperbolic2; }
  double area() const;
  double scalar_curvature() const;
  int euler_characteristic() const;
  int first_betti() const;

  /// Same factor with a different size parameter (radius / both periods / scale).
  FactorSpec with_size(double value) const;

  bool operator==(const FactorSpec&) const = default;

 private:
  FactorSpec() = default;
  FactorKind kind_ = FactorKind::Sphere2;
  double p1_ = 1.0;
  double p2_ = 1.0;
  int genus_ = 0;
  std::vector<double> spectrum_;
  int truncation_ = 0;
};

class ProductManifold {
 public:
  ProductManifold(FactorSpec factor1, FactorSpec factor2);

  const FactorSpec& factor1() const { return f1_; }
  const FactorSpec& factor2() const { return f2_; }
  const FactorSpec& factor(int which) const { return which == 1 ? f1_ : f2_; }
  double volume() const { return f1_.area() * f2_.area(); }
  int euler_characteristic() const {
    return f1_.euler_characteristic() * f2_.euler_characteristic();
  }
  int first_betti() const { return f1_.first_betti() + f2_.first_betti(); }
  bool grid_backed() const { return f1_.grid_backed() && f2_.grid_backed(); }
  std::string describe() const;

  bool operator==(const ProductManifold&) const = default;

 private:
  FactorSpec f1_;
  FactorSpec f2_;
};

struct CurvatureData {
  double R1 = 0;
  double R2 = 0;
  double R = 0;
  double ricci_norm_sq = 0;
  double volume = 0;
};

CurvatureData curvature_scalars(const ProductManifold& m);

/// Nodes and weights for one surface factor. Coordinates are (colatitude,
/// longitude) on spheres and (x, y) on tori.
struct FactorQuadrature {
  Eigen::MatrixX2d coords;
  Eigen::VectorXd weights;
  Eigen::Index size() const { return weights.size(); }
};

struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
GaussLegendre gauss_legendre(int n);

/// Gauss-Legendre in cos(colatitude) with lmax+1 nodes times 2*lmax+1
/// uniform longitudes (sphere); uniform (2*kmax+1)^2 rule (torus).
FactorQuadrature factor_quadrature(const FactorSpec& f);

/// Tensor-product rule on M. Node k corresponds to the factor pair
/// (k / n2, k % n2).
struct QuadratureRule {
  FactorQuadrature factor1;
  FactorQuadrature factor2;
  Eigen::VectorXd weights;
  Eigen::Index size() const { return weights.size(); }
};

/// Throws AbstractFactorNotGridBacked unless both factors are grid backed.
QuadratureRule build_quadrature(const ProductManifold& m);

}  // namespace qcurv
