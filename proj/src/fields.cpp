#include "qcurv/fields.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <boost/math/special_functions/spherical_harmonic.hpp>

#include "qcurv/error.hpp"

namespace qcurv {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kCheckSeed = 0x9e3779b97f4a7c15ULL;

// Per-axis torus slot: 0 -> constant, 2k-1 -> cos(k.), 2k -> sin(k.).
int slot_wave(int s) { return (s + 1) / 2; }
int slot_signed(int s) { return s == 0 ? 0 : (s % 2 == 1 ? slot_wave(s) : -slot_wave(s)); }
int signed_slot(int k) { return k == 0 ? 0 : (k > 0 ? 2 * k - 1 : -2 * k); }

double axis_value(int s, double x, double period) {
  if (s == 0) return 1.0 / std::sqrt(period);
  const double arg = 2 * kPi * slot_wave(s) * x / period;
  const double amp = std::sqrt(2.0 / period);
  return s % 2 == 1 ? amp * std::cos(arg) : amp * std::sin(arg);
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::Map<const RowMatrix> as_matrix(const Eigen::VectorXd& v, Eigen::Index rows,
                                      Eigen::Index cols) {
  return Eigen::Map<const RowMatrix>(v.data(), rows, cols);
}

Eigen::VectorXd flatten(const RowMatrix& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}
}  // namespace

// ---------------------------------------------------------------------------
// FactorBasis

FactorBasis::FactorBasis(const FactorSpec& f) : spec_(f) {
  switch (f.kind()) {
    case FactorKind::Sphere2: {
      const int L = f.truncation();
      const int n = (L + 1) * (L + 1);
      eigenvalues_.resize(n);
      degree_.resize(n);
      labels_.resize(n);
      const double a2 = f.radius() * f.radius();
      for (int l = 0; l <= L; ++l)
        for (int m = -l; m <= l; ++m) {
          const int i = l * l + l + m;
          eigenvalues_[i] = l * (l + 1) / a2;
          degree_[i] = l;
          labels_[i] = {l, m};
        }
      break;
    }
    case FactorKind::FlatTorus2: {
      const int ns = 2 * f.truncation() + 1;
      eigenvalues_.resize(ns * ns);
      degree_.resize(ns * ns);
      labels_.resize(ns * ns);
      for (int s1 = 0; s1 < ns; ++s1)
        for (int s2 = 0; s2 < ns; ++s2) {
          const int i = s1 * ns + s2;
          const double k1 = 2 * kPi * slot_wave(s1) / f.period1();
          const double k2 = 2 * kPi * slot_wave(s2) / f.period2();
          eigenvalues_[i] = k1 * k1 + k2 * k2;
          degree_[i] = std::max(slot_wave(s1), slot_wave(s2));
          labels_[i] = {slot_signed(s1), slot_signed(s2)};
        }
      break;
    }
    case FactorKind::AbstractHyperbolic2: {
      const int n = f.truncation();
      eigenvalues_.setZero(n);
      degree_.resize(n);
      labels_.resize(n);
      for (int i = 0; i < n; ++i) {
        if (!f.spectrum().empty()) eigenvalues_[i] = f.spectrum()[static_cast<std::size_t>(i)];
        degree_[i] = i;
        labels_[i] = {i, 0};
      }
      break;
    }
  }
}

int FactorBasis::index_of(int a, int b) const {
  switch (spec_.kind()) {
    case FactorKind::Sphere2:
      if (a < 0 || a > spec_.truncation() || std::abs(b) > a)
        fail(ErrorCode::InvalidArgument, "spherical mode outside truncation");
      return a * a + a + b;
    case FactorKind::FlatTorus2: {
      const int K = spec_.truncation();
      if (std::abs(a) > K || std::abs(b) > K)
        fail(ErrorCode::InvalidArgument, "Fourier mode outside truncation");
      return signed_slot(a) * (2 * K + 1) + signed_slot(b);
    }
    case FactorKind::AbstractHyperbolic2:
      if (a < 0 || a >= size() || b != 0)
        fail(ErrorCode::InvalidArgument, "abstract mode outside truncation");
      return a;
  }
  return 0;
}

Eigen::VectorXd FactorBasis::evaluate(double c0, double c1) const {
  Eigen::VectorXd v(size());
  switch (spec_.kind()) {
    case FactorKind::Sphere2: {
      const int L = spec_.truncation();
      const double inv_a = 1.0 / spec_.radius();
      for (int l = 0; l <= L; ++l) {
        v[l * l + l] = boost::math::spherical_harmonic_r(l, 0, c0, c1) * inv_a;
        for (int m = 1; m <= l; ++m) {
          const std::complex<double> y = boost::math::spherical_harmonic(l, m, c0, c1);
          v[l * l + l + m] = std::numbers::sqrt2 * y.real() * inv_a;
          v[l * l + l - m] = std::numbers::sqrt2 * y.imag() * inv_a;
        }
      }
      break;
    }
    case FactorKind::FlatTorus2: {
      const int ns = 2 * spec_.truncation() + 1;
      Eigen::VectorXd ax(ns), ay(ns);
      for (int s = 0; s < ns; ++s) {
        ax[s] = axis_value(s, c0, spec_.period1());
        ay[s] = axis_value(s, c1, spec_.period2());
      }
      for (int s1 = 0; s1 < ns; ++s1)
        for (int s2 = 0; s2 < ns; ++s2) v[s1 * ns + s2] = ax[s1] * ay[s2];
      break;
    }
    case FactorKind::AbstractHyperbolic2:
      if (size() > 1)
        fail(ErrorCode::AbstractFactorNotGridBacked,
             "non-constant eigenfunctions of an abstract hyperbolic factor cannot be evaluated");
      v[0] = 1.0 / std::sqrt(spec_.area());
      break;
  }
  return v;
}

RowMatrix FactorBasis::table(const Eigen::MatrixX2d& coords) const {
  RowMatrix t(coords.rows(), size());
  const Eigen::Index n = coords.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) t.row(k) = evaluate(coords(k, 0), coords(k, 1)).transpose();
  return t;
}

// ---------------------------------------------------------------------------
// Sector

std::string to_string(SectorKind kind) {
  return kind == SectorKind::FullProduct ? "full" : "factor1";
}

SectorKind sector_kind_from_string(const std::string& name) {
  if (name == "full" || name == "FullProduct") return SectorKind::FullProduct;
  if (name == "factor1" || name == "Factor1Only") return SectorKind::Factor1Only;
  fail(ErrorCode::InvalidArgument, "unknown sector '" + name + "' (expected full or factor1)");
}

Sector::Sector(const ProductManifold& m, SectorKind kind)
    : manifold_(m), kind_(kind), basis1_(m.factor1()), basis2_(m.factor2()) {}

std::shared_ptr<const Sector> Sector::make(const ProductManifold& m, SectorKind kind,
                                           int check_points) {
  std::shared_ptr<Sector> s(new Sector(m, kind));
  s->m1_ = s->basis1_.size();
  s->m2_ = kind == SectorKind::Factor1Only ? 1 : s->basis2_.size();
  s->grid_backed_ =
      m.factor1().grid_backed() && (kind == SectorKind::Factor1Only || m.factor2().grid_backed());
  if (!s->grid_backed_) return s;

  const double area2 = m.factor2().area();
  s->quad1_ = factor_quadrature(m.factor1());
  s->table1_ = s->basis1_.table(s->quad1_.coords);
  if (kind == SectorKind::Factor1Only) {
    s->quad2_.coords = Eigen::MatrixX2d::Zero(1, 2);
    s->quad2_.weights = Eigen::VectorXd::Constant(1, area2);
    s->table2_ = RowMatrix::Constant(1, 1, 1.0 / std::sqrt(area2));
  } else {
    s->quad2_ = factor_quadrature(m.factor2());
    s->table2_ = s->basis2_.table(s->quad2_.coords);
  }
  const Eigen::Index n1 = s->quad1_.size(), n2 = s->quad2_.size();
  s->weights_.resize(n1 * n2);
  for (Eigen::Index a = 0; a < n1; ++a)
    for (Eigen::Index b = 0; b < n2; ++b)
      s->weights_[a * n2 + b] = s->quad1_.weights[a] * s->quad2_.weights[b];

  std::mt19937_64 rng(kCheckSeed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto random_point = [&](const FactorSpec& f) -> std::array<double, 2> {
    const double u = uni(rng), v = uni(rng);
    if (f.kind() == FactorKind::Sphere2) return {std::acos(1 - 2 * u), 2 * kPi * v};
    return {f.period1() * u, f.period2() * v};
  };
  s->check_coords1_.resize(check_points, 2);
  s->check_coords2_ = Eigen::MatrixX2d::Zero(check_points, 2);
  for (int j = 0; j < check_points; ++j) {
    const auto p1 = random_point(m.factor1());
    s->check_coords1_.row(j) << p1[0], p1[1];
    if (kind == SectorKind::FullProduct) {
      const auto p2 = random_point(m.factor2());
      s->check_coords2_.row(j) << p2[0], p2[1];
    }
  }
  s->check1_ = s->basis1_.table(s->check_coords1_);
  if (kind == SectorKind::Factor1Only)
    s->check2_ = RowMatrix::Constant(check_points, 1, 1.0 / std::sqrt(area2));
  else
    s->check2_ = s->basis2_.table(s->check_coords2_);
  return s;
}

std::string Sector::label() const { return to_string(kind_); }

double Sector::constant_coefficient(double value) const { return value * std::sqrt(volume()); }

RowMatrix Sector::dense_table() const {
  require_grid(*this, "dense_table");
  const Eigen::Index n1 = table1_.rows(), n2 = table2_.rows();
  RowMatrix t(n1 * n2, size());
#pragma omp parallel for schedule(static)
  for (Eigen::Index a = 0; a < n1; ++a)
    for (Eigen::Index b = 0; b < n2; ++b)
      for (Eigen::Index i1 = 0; i1 < m1_; ++i1)
        for (Eigen::Index i2 = 0; i2 < m2_; ++i2)
          t(a * n2 + b, i1 * m2_ + i2) = table1_(a, i1) * table2_(b, i2);
  return t;
}

bool Sector::compatible(const Sector& other) const {
  return this == &other || (kind_ == other.kind_ && manifold_ == other.manifold_);
}

void require_same_sector(const Sector& a, const Sector& b, const char* context) {
  if (!a.compatible(b))
    fail(ErrorCode::SectorMismatch, std::string(context) + ": fields live in different sectors (" +
                                        a.manifold().describe() + "/" + a.label() + " vs " +
                                        b.manifold().describe() + "/" + b.label() + ")");
}

void require_grid(const Sector& s, const char* context) {
  if (!s.grid_backed())
    fail(ErrorCode::AbstractFactorNotGridBacked,
         std::string(context) + ": sector " + s.label() + " of " + s.manifold().describe() +
             " has no quadrature grid");
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(SectorPtr sector, Eigen::VectorXd coeffs)
    : sector_(std::move(sector)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != sector_->size())
    fail(ErrorCode::SectorMismatch, "coefficient vector has " + std::to_string(coeffs_.size()) +
                                        " entries, sector has " + std::to_string(sector_->size()));
}

ScalarField::ScalarField(SectorPtr sector, Eigen::VectorXd coeffs, PointValues exact,
                         double aliasing)
    : ScalarField(std::move(sector), std::move(coeffs)) {
  if (exact.nodal.size() != sector_->node_count() || exact.check.size() != sector_->check_count())
    fail(ErrorCode::SectorMismatch, "point values do not match the sector grid");
  exact_ = std::move(exact);
  aliasing_ = aliasing;
}

ScalarField ScalarField::zero(SectorPtr sector) {
  const Eigen::Index n = sector->size();
  return ScalarField(std::move(sector), Eigen::VectorXd::Zero(n));
}

ScalarField ScalarField::constant(SectorPtr sector, double value) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(sector->size());
  c[0] = sector->constant_coefficient(value);
  return ScalarField(std::move(sector), std::move(c));
}

ScalarField ScalarField::basis(SectorPtr sector, Eigen::Index mode) {
  if (mode < 0 || mode >= sector->size()) fail(ErrorCode::InvalidArgument, "mode out of range");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(sector->size());
  c[mode] = 1.0;
  return ScalarField(std::move(sector), std::move(c));
}

namespace {
ScalarField combine(const ScalarField& a, const ScalarField& b, double sa, double sb) {
  require_same_sector(a.sector(), b.sector(), "field arithmetic");
  Eigen::VectorXd c = sa * a.coeffs() + sb * b.coeffs();
  if (!a.has_point_values() && !b.has_point_values())
    return ScalarField(a.sector_ptr(), std::move(c));
  const PointValues pa = point_values(a), pb = point_values(b);
  PointValues p{sa * pa.nodal + sb * pb.nodal, sa * pa.check + sb * pb.check};
  const double scale = std::max(max_abs(p.check), max_abs(p.nodal));
  const double alias =
      scale > 0 ? max_abs(p.check - check_values(a.sector(), c)) / scale : 0.0;
  return ScalarField(a.sector_ptr(), std::move(c), std::move(p), alias);
}
}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return combine(a, b, 1, 1); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return combine(a, b, 1, -1); }
ScalarField operator*(double s, const ScalarField& a) {
  if (!a.has_point_values()) return ScalarField(a.sector_ptr(), s * a.coeffs());
  PointValues p{s * a.exact()->nodal, s * a.exact()->check};
  return ScalarField(a.sector_ptr(), s * a.coeffs(), std::move(p), a.aliasing());
}

Eigen::VectorXd synthesize_coeffs(const Sector& s, const Eigen::VectorXd& coeffs) {
  require_grid(s, "synthesize");
  if (coeffs.size() != s.size()) fail(ErrorCode::SectorMismatch, "synthesize: size mismatch");
  const RowMatrix C = as_matrix(coeffs, s.m1(), s.m2());
  return flatten(kernels::tensor_synthesize(s.table1(), C, s.table2()));
}

Eigen::VectorXd synthesize(const ScalarField& f) {
  if (f.has_point_values()) return f.exact()->nodal;
  return synthesize_coeffs(f.sector(), f.coeffs());
}

Eigen::VectorXd check_values(const Sector& s, const Eigen::VectorXd& coeffs) {
  require_grid(s, "check_values");
  const RowMatrix C = as_matrix(coeffs, s.m1(), s.m2());
  const RowMatrix T = C * s.check_table2().transpose();  // m1 x nc
  Eigen::VectorXd out(s.check_count());
  for (Eigen::Index j = 0; j < s.check_count(); ++j) out[j] = s.check_table1().row(j).dot(T.col(j));
  return out;
}

PointValues point_values(const ScalarField& f) {
  if (f.has_point_values()) return *f.exact();
  return {synthesize_coeffs(f.sector(), f.coeffs()), check_values(f.sector(), f.coeffs())};
}

double evaluate_at(const Sector& s, const Eigen::VectorXd& coeffs, const std::array<double, 2>& x1,
                   const std::array<double, 2>& x2) {
  const Eigen::VectorXd b1 = s.basis1().evaluate(x1[0], x1[1]);
  Eigen::VectorXd b2;
  if (s.kind() == SectorKind::Factor1Only)
    b2 = Eigen::VectorXd::Constant(1, 1.0 / std::sqrt(s.manifold().factor2().area()));
  else
    b2 = s.basis2().evaluate(x2[0], x2[1]);
  const RowMatrix C = as_matrix(coeffs, s.m1(), s.m2());
  return b1.dot(C * b2);
}

ScalarField analyze(const Eigen::VectorXd& values, const SectorPtr& sector) {
  require_grid(*sector, "analyze");
  if (values.size() != sector->node_count())
    fail(ErrorCode::SectorMismatch, "analyze: got " + std::to_string(values.size()) +
                                        " values for a grid of " +
                                        std::to_string(sector->node_count()));
  const RowMatrix V = as_matrix(values, sector->n1(), sector->n2());
  return ScalarField(sector, flatten(kernels::tensor_analyze(sector->table1(), sector->weights1(), V,
                                                             sector->weights2(), sector->table2())));
}

ScalarField from_point_values(const SectorPtr& sector, PointValues exact) {
  Eigen::VectorXd c = analyze(exact.nodal, sector).coeffs();
  const double scale = std::max(max_abs(exact.check), max_abs(exact.nodal));
  const double alias =
      scale > 0 ? max_abs(exact.check - check_values(*sector, c)) / scale : 0.0;
  return ScalarField(sector, std::move(c), std::move(exact), alias);
}

ScalarField sample_function(const SectorPtr& sector,
                            const std::function<double(const SamplePoint&)>& fn) {
  require_grid(*sector, "sample_function");
  const Sector& s = *sector;
  PointValues p{Eigen::VectorXd(s.node_count()), Eigen::VectorXd(s.check_count())};
  const auto& c1 = s.quadrature1().coords;
  const auto& c2 = s.quadrature2().coords;
  const Eigen::Index n2 = s.n2();
  for (Eigen::Index k = 0; k < s.node_count(); ++k) {
    const Eigen::Index a = k / n2, b = k % n2;
    p.nodal[k] = fn({{c1(a, 0), c1(a, 1)}, {c2(b, 0), c2(b, 1)}});
  }
  for (Eigen::Index j = 0; j < s.check_count(); ++j)
    p.check[j] = fn({{s.check_coords1()(j, 0), s.check_coords1()(j, 1)},
                     {s.check_coords2()(j, 0), s.check_coords2()(j, 1)}});
  return from_point_values(sector, std::move(p));
}

ScalarField pointwise_map(const ScalarField& f, const std::function<double(double)>& map,
                          double max_aliasing) {
  require_grid(f.sector(), "pointwise_map");
  const PointValues in = point_values(f);
  PointValues out{kernels::map_values(in.nodal, map), kernels::map_values(in.check, map)};
  ScalarField r = from_point_values(f.sector_ptr(), std::move(out));
  if (r.aliasing() > max_aliasing)
    fail(ErrorCode::AliasingExceeded,
         "pointwise map residual " + sci(r.aliasing()) + " exceeds " +
             sci(max_aliasing) + "; raise the truncation");
  return r;
}

ScalarField multiply(const ScalarField& f, const ScalarField& h, double max_aliasing) {
  require_same_sector(f.sector(), h.sector(), "multiply");
  const PointValues a = point_values(f), b = point_values(h);
  ScalarField r = from_point_values(
      f.sector_ptr(), {a.nodal.cwiseProduct(b.nodal), a.check.cwiseProduct(b.check)});
  if (r.aliasing() > max_aliasing)
    fail(ErrorCode::AliasingExceeded,
         "product residual " + sci(r.aliasing()) + " exceeds truncation");
  return r;
}

// ---------------------------------------------------------------------------
// Measures

MeasureWeights background_measure(const SectorPtr& sector) {
  if (sector->grid_backed()) return {sector, sector->weights(), false};
  return {sector, {}, true};
}

double inner_product(const ScalarField& f, const ScalarField& h, const MeasureWeights& w) {
  require_same_sector(f.sector(), h.sector(), "inner_product");
  require_same_sector(f.sector(), *w.sector, "inner_product");
  if (w.spectral) return f.coeffs().dot(h.coeffs());
  return kernels::weighted_dot(w.nodal, synthesize(f), synthesize(h));
}

double l2_norm(const ScalarField& f, const MeasureWeights& w) {
  return std::sqrt(std::max(0.0, inner_product(f, f, w)));
}

double integral(const ScalarField& f, const MeasureWeights& w) {
  require_same_sector(f.sector(), *w.sector, "integral");
  if (w.spectral) return f.coeffs()[0] * std::sqrt(f.sector().volume());
  return kernels::weighted_dot(w.nodal, synthesize(f), Eigen::VectorXd::Ones(w.nodal.size()));
}

// ---------------------------------------------------------------------------
// ConformalFactor

ConformalFactor::ConformalFactor(const ScalarField& omega, double max_aliasing)
    : omega_(omega.sector_ptr(), omega.coeffs()) {
  require_grid(omega.sector(), "ConformalFactor");
  nodal_ = synthesize(omega_);
  check_ = check_values(omega_.sector(), omega_.coeffs());
  if (is_zero()) return;
  const Eigen::VectorXd e_nodal = exp_nodal(2.0);
  const Eigen::VectorXd e_check = exp_check(2.0);
  const ScalarField proj = analyze(e_nodal, omega_.sector_ptr());
  const Eigen::VectorXd diff = e_check - check_values(omega_.sector(), proj.coeffs());
  aliasing_ = max_abs(diff) / std::max(max_abs(e_check), max_abs(e_nodal));
  if (aliasing_ > max_aliasing)
    fail(ErrorCode::AliasingExceeded,
         "e^{2 omega} aliasing " + sci(aliasing_) + " exceeds " +
             sci(max_aliasing) + " (lower the amplitude or bandlimit)");
}

ConformalFactor ConformalFactor::zero(const SectorPtr& sector) {
  return ConformalFactor(ScalarField::zero(sector));
}

ConformalFactor ConformalFactor::constant(const SectorPtr& sector, double c) {
  return ConformalFactor(ScalarField::constant(sector, c));
}

Eigen::VectorXd ConformalFactor::exp_nodal(double k) const {
  return kernels::map_values(nodal_, [k](double w) { return std::exp(k * w); });
}

Eigen::VectorXd ConformalFactor::exp_check(double k) const {
  return check_.unaryExpr([k](double w) { return std::exp(k * w); });
}

ConformalFactor compose(const ConformalFactor& a, const ConformalFactor& b, double max_aliasing) {
  require_same_sector(a.sector(), b.sector(), "compose");
  return ConformalFactor(ScalarField(a.sector_ptr(), a.omega().coeffs() + b.omega().coeffs()),
                         max_aliasing);
}

MeasureWeights conformal_measure(const ConformalFactor& omega) {
  return {omega.sector_ptr(), omega.sector().weights().cwiseProduct(omega.exp_nodal(4.0)), false};
}

// ---------------------------------------------------------------------------

ScalarField random_bandlimited(const SectorPtr& sector, std::uint64_t seed,
                               const BandlimitOptions& opts) {
  require_grid(*sector, "random_bandlimited");
  const Sector& s = *sector;
  const auto& m = s.manifold();
  const int b1 = static_cast<int>(std::floor(m.factor1().truncation() * opts.fraction));
  const int b2 = s.kind() == SectorKind::Factor1Only
                     ? 0
                     : static_cast<int>(std::floor(m.factor2().truncation() * opts.fraction));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const Mode md = s.mode(i);
    const int d1 = s.basis1().degree(md.i1);
    const int d2 = s.kind() == SectorKind::Factor1Only ? 0 : s.basis2().degree(md.i2);
    if (d1 > b1 || d2 > b2) continue;
    const double g = normal(rng);
    if (i == 0 && opts.zero_mean) continue;
    c[i] = g * std::exp(-opts.decay * (d1 + d2));
  }
  if (c.isZero(0.0))
    fail(ErrorCode::InvalidArgument,
         "bandlimit admits no non-constant modes at this truncation; raise lmax/kmax");
  const double peak = max_abs(synthesize_coeffs(s, c));
  return ScalarField(sector, c * (opts.amplitude / peak));
}

}  // namespace qcurv
