#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcurv/geometry.hpp"
#include "qcurv/kernels.hpp"

namespace qcurv {

using kernels::RowMatrix;

/// Orthonormal real eigenbasis of the (nonnegative) Laplacian on one factor.
///
/// Spheres: real spherical harmonics Y_l^m / a, index l^2 + l + m.
/// Tori: products of per-axis real Fourier functions {1, cos kx, sin kx}
/// normalized on the period; per-axis slot 0 is the constant, 2k-1 is
/// cos(k .) and 2k is sin(k .).
/// Abstract hyperbolic: eigenvalues from the supplied spectrum; only the
/// constant mode can be evaluated.
class FactorBasis {
 public:
  explicit FactorBasis(const FactorSpec& f);

  int size() const { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double eigenvalue(int i) const { return eigenvalues_[i]; }
  /// Spherical degree l, maximal per-axis Fourier index, or spectrum index.
  int degree(int i) const { return degree_[static_cast<std::size_t>(i)]; }
  /// (l, m) on spheres, signed per-axis wave numbers (+k: cos, -k: sin) on tori,
  /// (n, 0) on abstract factors.
  std::array<int, 2> label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
  int index_of(int a, int b) const;

  Eigen::VectorXd evaluate(double c0, double c1) const;
  RowMatrix table(const Eigen::MatrixX2d& coords) const;

 private:
  FactorSpec spec_;
  Eigen::VectorXd eigenvalues_;
  std::vector<int> degree_;
  std::vector<std::array<int, 2>> labels_;
};

enum class SectorKind { FullProduct, Factor1Only };

std::string to_string(SectorKind kind);
SectorKind sector_kind_from_string(const std::string& name);

struct Mode {
  int i1;
  int i2;
};

/// An invariant subspace of functions on M: either all truncated product
/// modes or the modes constant along factor 2. Holds the basis tables on the
/// quadrature grid and on a fixed set of off-grid check points.
///
/// For Factor1Only the second factor is represented by a single pseudo-node
/// of weight area(F2) carrying the normalized constant 1/sqrt(area(F2)).
class Sector {
 public:
  static std::shared_ptr<const Sector> make(const ProductManifold& m, SectorKind kind,
                                            int check_points = 96);

  SectorKind kind() const { return kind_; }
  const ProductManifold& manifold() const { return manifold_; }
  const FactorBasis& basis1() const { return basis1_; }
  const FactorBasis& basis2() const { return basis2_; }
  std::string label() const;

  Eigen::Index size() const { return m1_ * m2_; }
  Eigen::Index m1() const { return m1_; }
  Eigen::Index m2() const { return m2_; }
  Mode mode(Eigen::Index i) const {
    return {static_cast<int>(i / m2_), static_cast<int>(i % m2_)};
  }
  Eigen::Index index(int i1, int i2) const { return i1 * m2_ + i2; }
  double mu(Eigen::Index i) const { return basis1_.eigenvalue(mode(i).i1); }
  double nu(Eigen::Index i) const { return basis2_.eigenvalue(mode(i).i2); }
  double volume() const { return manifold_.volume(); }
  /// Coefficient of the constant function `value` on mode 0.
  double constant_coefficient(double value) const;

  bool grid_backed() const { return grid_backed_; }
  Eigen::Index node_count() const { return weights_.size(); }
  Eigen::Index n1() const { return table1_.rows(); }
  Eigen::Index n2() const { return table2_.rows(); }
  const RowMatrix& table1() const { return table1_; }
  const RowMatrix& table2() const { return table2_; }
  const Eigen::VectorXd& weights1() const { return quad1_.weights; }
  const Eigen::VectorXd& weights2() const { return quad2_.weights; }
  /// Product weights of the background metric, node k = (k / n2, k % n2).
  const Eigen::VectorXd& weights() const { return weights_; }
  const FactorQuadrature& quadrature1() const { return quad1_; }
  const FactorQuadrature& quadrature2() const { return quad2_; }

  Eigen::Index check_count() const { return check1_.rows(); }
  const RowMatrix& check_table1() const { return check1_; }
  const RowMatrix& check_table2() const { return check2_; }
  const Eigen::MatrixX2d& check_coords1() const { return check_coords1_; }
  const Eigen::MatrixX2d& check_coords2() const { return check_coords2_; }

  /// Node-by-mode table of the full sector basis (size node_count x size).
  RowMatrix dense_table() const;

  bool compatible(const Sector& other) const;

 private:
  Sector(const ProductManifold& m, SectorKind kind);

  ProductManifold manifold_;
  SectorKind kind_;
  FactorBasis basis1_;
  FactorBasis basis2_;
  Eigen::Index m1_ = 0;
  Eigen::Index m2_ = 0;
  bool grid_backed_ = false;
  FactorQuadrature quad1_;
  FactorQuadrature quad2_;
  RowMatrix table1_;
  RowMatrix table2_;
  Eigen::VectorXd weights_;
  Eigen::MatrixX2d check_coords1_;
  Eigen::MatrixX2d check_coords2_;
  RowMatrix check1_;
  RowMatrix check2_;
};

using SectorPtr = std::shared_ptr<const Sector>;

void require_same_sector(const Sector& a, const Sector& b, const char* context);
void require_grid(const Sector& s, const char* context);

/// Exact point values of a (possibly non-bandlimited) function: on the
/// quadrature nodes and on the sector's check points.
struct PointValues {
  Eigen::VectorXd nodal;
  Eigen::VectorXd check;
};

/// A function on M in a sector. Bandlimited fields are fully described by
/// their coefficients. Fields produced by pointwise operations additionally
/// carry their exact point values, which are authoritative for integrals and
/// sign tests; the coefficients are then the quadrature projection and
/// `aliasing()` records how far that projection is from the exact values.
class ScalarField {
 public:
  ScalarField(SectorPtr sector, Eigen::VectorXd coeffs);
  ScalarField(SectorPtr sector, Eigen::VectorXd coeffs, PointValues exact, double aliasing);

  static ScalarField zero(SectorPtr sector);
  static ScalarField constant(SectorPtr sector, double value);
  static ScalarField basis(SectorPtr sector, Eigen::Index mode);

  const Sector& sector() const { return *sector_; }
  const SectorPtr& sector_ptr() const { return sector_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  bool has_point_values() const { return exact_.has_value(); }
  const std::optional<PointValues>& exact() const { return exact_; }
  double aliasing() const { return aliasing_; }
  double coeff_norm() const { return coeffs_.norm(); }

 private:
  SectorPtr sector_;
  Eigen::VectorXd coeffs_;
  std::optional<PointValues> exact_;
  double aliasing_ = 0;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

/// Grid values of f (exact values when stored, synthesis otherwise).
Eigen::VectorXd synthesize(const ScalarField& f);
PointValues point_values(const ScalarField& f);
Eigen::VectorXd synthesize_coeffs(const Sector& s, const Eigen::VectorXd& coeffs);
Eigen::VectorXd check_values(const Sector& s, const Eigen::VectorXd& coeffs);
/// Value of a bandlimited coefficient vector at one point (x1 on factor 1,
/// x2 on factor 2; x2 ignored for Factor1Only).
double evaluate_at(const Sector& s, const Eigen::VectorXd& coeffs, const std::array<double, 2>& x1,
                   const std::array<double, 2>& x2);

/// Quadrature projection of grid values onto the sector basis.
ScalarField analyze(const Eigen::VectorXd& values, const SectorPtr& sector);
/// Projection that keeps the exact point values and records the aliasing
/// residual: max over check points of |exact - projection| / max |exact|.
ScalarField from_point_values(const SectorPtr& sector, PointValues exact);

struct SamplePoint {
  std::array<double, 2> x1;
  std::array<double, 2> x2;
};
/// Samples a closed-form function on nodes and check points.
ScalarField sample_function(const SectorPtr& sector,
                            const std::function<double(const SamplePoint&)>& fn);

inline constexpr double kMapAliasingLimit = 1e-6;
inline constexpr double kConformalAliasingLimit = 1e-8;
inline constexpr double kNoAliasingLimit = std::numeric_limits<double>::infinity();

/// Synthesize, apply `map` pointwise, re-analyze. Throws AliasingExceeded when
/// the residual is above `max_aliasing`; pass kNoAliasingLimit to keep the
/// exact point values regardless (e.g. for non-smooth maps used only in sign
/// tests).
ScalarField pointwise_map(const ScalarField& f, const std::function<double(double)>& map,
                          double max_aliasing = kMapAliasingLimit);
ScalarField multiply(const ScalarField& f, const ScalarField& h,
                     double max_aliasing = kMapAliasingLimit);

/// Quadrature weights of a metric in the conformal class. Spectral measures
/// (background metric on a sector without a grid) use the coefficient dot
/// product, which is exact for the orthonormal basis.
struct MeasureWeights {
  SectorPtr sector;
  Eigen::VectorXd nodal;
  bool spectral = false;
};

MeasureWeights background_measure(const SectorPtr& sector);
double inner_product(const ScalarField& f, const ScalarField& h, const MeasureWeights& w);
double l2_norm(const ScalarField& f, const MeasureWeights& w);
double integral(const ScalarField& f, const MeasureWeights& w);

/// omega for g_hat = e^{2 omega} g, stored through its coefficients. The
/// aliasing of e^{2 omega} against the truncation is measured on
/// construction and must stay below `max_aliasing`.
class ConformalFactor {
 public:
  explicit ConformalFactor(const ScalarField& omega, double max_aliasing = kConformalAliasingLimit);

  static ConformalFactor zero(const SectorPtr& sector);
  static ConformalFactor constant(const SectorPtr& sector, double c);

  const ScalarField& omega() const { return omega_; }
  const Sector& sector() const { return omega_.sector(); }
  const SectorPtr& sector_ptr() const { return omega_.sector_ptr(); }
  const Eigen::VectorXd& nodal() const { return nodal_; }
  const Eigen::VectorXd& check() const { return check_; }
  double aliasing() const { return aliasing_; }
  bool is_zero() const { return omega_.coeffs().isZero(0.0); }

  /// e^{k omega} on nodes / check points.
  Eigen::VectorXd exp_nodal(double k) const;
  Eigen::VectorXd exp_check(double k) const;

 private:
  ScalarField omega_;
  Eigen::VectorXd nodal_;
  Eigen::VectorXd check_;
  double aliasing_ = 0;
};

ConformalFactor compose(const ConformalFactor& a, const ConformalFactor& b,
                        double max_aliasing = kConformalAliasingLimit);

MeasureWeights conformal_measure(const ConformalFactor& omega);

struct BandlimitOptions {
  double fraction = 1.0 / 3.0;  // bandlimit = floor(truncation * fraction) per factor
  double amplitude = 0.15;      // max |omega| on the grid
  double decay = 2.0;           // coefficient envelope exp(-decay * degree)
  bool zero_mean = true;
};

/// Seeded random bandlimited field, scaled to the requested sup-norm.
ScalarField random_bandlimited(const SectorPtr& sector, std::uint64_t seed,
                               const BandlimitOptions& opts = {});

}  // namespace qcurv
