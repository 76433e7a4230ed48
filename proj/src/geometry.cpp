#include "qcurv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/legendre.hpp>

#include "qcurv/error.hpp"

namespace qcurv {

namespace {
constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}
}  // namespace

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Sphere2: return "Sphere2";
    case FactorKind::FlatTorus2: return "FlatTorus2";
    case FactorKind::AbstractHyperbolic2: return "AbstractHyperbolic2";
  }
  return "?";
}

FactorKind factor_kind_from_string(const std::string& name) {
  if (name == "Sphere2") return FactorKind::Sphere2;
  if (name == "FlatTorus2") return FactorKind::FlatTorus2;
  if (name == "AbstractHyperbolic2") return FactorKind::AbstractHyperbolic2;
  fail(ErrorCode::InvalidArgument,
       "unknown factor kind '" + name + "' (expected Sphere2, FlatTorus2 or AbstractHyperbolic2)");
}

FactorSpec FactorSpec::sphere(double radius, int lmax) {
  require(std::isfinite(radius) && radius > 0, "sphere radius must be positive");
  require(lmax >= 0, "sphere lmax must be non-negative");
  FactorSpec f;
  f.kind_ = FactorKind::Sphere2;
  f.p1_ = radius;
  f.p2_ = radius;
  f.truncation_ = lmax;
  return f;
}

FactorSpec FactorSpec::torus(double period1, double period2, int kmax) {
  require(std::isfinite(period1) && period1 > 0 && std::isfinite(period2) && period2 > 0,
          "torus periods must be positive");
  require(kmax >= 0, "torus kmax must be non-negative");
  FactorSpec f;
  f.kind_ = FactorKind::FlatTorus2;
  f.p1_ = period1;
  f.p2_ = period2;
  f.truncation_ = kmax;
  return f;
}

FactorSpec FactorSpec::hyperbolic(double scale, int genus, std::vector<double> spectrum,
                                  int modes) {
  require(std::isfinite(scale) && scale > 0, "hyperbolic curvature scale must be positive");
  require(genus >= 2, "hyperbolic factor needs genus >= 2");
  if (!spectrum.empty()) {
    require(spectrum.front() == 0.0, "hyperbolic spectrum must start with 0");
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      require(std::isfinite(spectrum[i]) && spectrum[i] >= 0, "spectrum values must be >= 0");
      if (i > 0) require(spectrum[i] >= spectrum[i - 1], "spectrum must be sorted ascending");
    }
  }
  const int available = spectrum.empty() ? 1 : static_cast<int>(spectrum.size());
  require(modes >= 0 && modes <= available, "hyperbolic modes exceeds supplied spectrum");
  FactorSpec f;
  f.kind_ = FactorKind::AbstractHyperbolic2;
  f.p1_ = scale;
  f.p2_ = scale;
  f.genus_ = genus;
  f.spectrum_ = std::move(spectrum);
  f.truncation_ = modes == 0 ? available : modes;
  return f;
}

double FactorSpec::area() const {
  switch (kind_) {
    case FactorKind::Sphere2: return 4 * kPi * p1_ * p1_;
    case FactorKind::FlatTorus2: return p1_ * p2_;
    case FactorKind::AbstractHyperbolic2: return 4 * kPi * (genus_ - 1) * p1_ * p1_;
  }
  return 0;
}

double FactorSpec::scalar_curvature() const {
  switch (kind_) {
    case FactorKind::Sphere2: return 2 / (p1_ * p1_);
    case FactorKind::FlatTorus2: return 0;
    case FactorKind::AbstractHyperbolic2: return -2 / (p1_ * p1_);
  }
  return 0;
}

int FactorSpec::euler_characteristic() const {
  switch (kind_) {
    case FactorKind::Sphere2: return 2;
    case FactorKind::FlatTorus2: return 0;
    case FactorKind::AbstractHyperbolic2: return 2 - 2 * genus_;
  }
  return 0;
}

int FactorSpec::first_betti() const {
  switch (kind_) {
    case FactorKind::Sphere2: return 0;
    case FactorKind::FlatTorus2: return 2;
    case FactorKind::AbstractHyperbolic2: return 2 * genus_;
  }
  return 0;
}

FactorSpec FactorSpec::with_size(double value) const {
  switch (kind_) {
    case FactorKind::Sphere2: return sphere(value, truncation_);
    case FactorKind::FlatTorus2: return torus(value, p2_ * value / p1_, truncation_);
    case FactorKind::AbstractHyperbolic2: {
      // The Laplace spectrum scales like 1/b^2.
      std::vector<double> spec = spectrum_;
      const double ratio = (p1_ * p1_) / (value * value);
      for (double& s : spec) s *= ratio;
      return hyperbolic(value, genus_, std::move(spec), truncation_);
    }
  }
  return *this;
}

ProductManifold::ProductManifold(FactorSpec factor1, FactorSpec factor2)
    : f1_(std::move(factor1)), f2_(std::move(factor2)) {}

std::string ProductManifold::describe() const {
  auto one = [](const FactorSpec& f) {
    std::ostringstream os;
    os.precision(17);
    switch (f.kind()) {
      case FactorKind::Sphere2: os << "S2(" << f.radius() << ")"; break;
      case FactorKind::FlatTorus2: os << "T2(" << f.period1() << "," << f.period2() << ")"; break;
      case FactorKind::AbstractHyperbolic2:
        os << "Hyp(" << f.scale() << ",genus=" << f.genus() << ")";
        break;
    }
    return os.str();
  };
  return one(f1_) + "x" + one(f2_);
}

CurvatureData curvature_scalars(const ProductManifold& m) {
  CurvatureData c;
  c.R1 = m.factor1().scalar_curvature();
  c.R2 = m.factor2().scalar_curvature();
  c.R = c.R1 + c.R2;
  // Ric = (R_i / 2) g_i on each factor, so |Ric|^2 = 2 (R_i/2)^2 per factor.
  c.ricci_norm_sq = 0.5 * c.R1 * c.R1 + 0.5 * c.R2 * c.R2;
  c.volume = m.volume();
  return c;
}

GaussLegendre gauss_legendre(int n) {
  require(n >= 1, "Gauss-Legendre needs at least one node");
  const std::vector<double> positive = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  x.reserve(n);
  for (auto it = positive.rbegin(); it != positive.rend(); ++it)
    if (*it > 0) x.push_back(-*it);
  for (double z : positive) x.push_back(z);
  GaussLegendre gl{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const double dp = boost::math::legendre_p_prime(n, x[i]);
    gl.nodes[i] = x[i];
    gl.weights[i] = 2.0 / ((1 - x[i] * x[i]) * dp * dp);
  }
  return gl;
}

FactorQuadrature factor_quadrature(const FactorSpec& f) {
  FactorQuadrature q;
  switch (f.kind()) {
    case FactorKind::Sphere2: {
      const int L = f.truncation();
      const int nt = L + 1;
      const int np = 2 * L + 1;
      const GaussLegendre gl = gauss_legendre(nt);
      q.coords.resize(nt * np, 2);
      q.weights.resize(nt * np);
      const double a2 = f.radius() * f.radius();
      for (int i = 0; i < nt; ++i) {
        // Descending cos(theta) gives ascending colatitude.
        const double x = gl.nodes[nt - 1 - i];
        const double w = gl.weights[nt - 1 - i];
        for (int j = 0; j < np; ++j) {
          const int k = i * np + j;
          q.coords(k, 0) = std::acos(x);
          q.coords(k, 1) = 2 * kPi * j / np;
          q.weights[k] = a2 * w * 2 * kPi / np;
        }
      }
      break;
    }
    case FactorKind::FlatTorus2: {
      const int n = 2 * f.truncation() + 1;
      q.coords.resize(n * n, 2);
      q.weights.setConstant(n * n, f.period1() * f.period2() / (double(n) * n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          q.coords(i * n + j, 0) = f.period1() * i / n;
          q.coords(i * n + j, 1) = f.period2() * j / n;
        }
      break;
    }
    case FactorKind::AbstractHyperbolic2:
      fail(ErrorCode::AbstractFactorNotGridBacked,
           "AbstractHyperbolic2 factor has no quadrature grid");
  }
  return q;
}

QuadratureRule build_quadrature(const ProductManifold& m) {
  if (!m.grid_backed())
    fail(ErrorCode::AbstractFactorNotGridBacked,
         "full-product quadrature requested on " + m.describe() +
             "; restrict to the Factor1Only sector instead");
  QuadratureRule rule{factor_quadrature(m.factor1()), factor_quadrature(m.factor2()), {}};
  const Eigen::Index n1 = rule.factor1.size();
  const Eigen::Index n2 = rule.factor2.size();
  rule.weights.resize(n1 * n2);
  for (Eigen::Index a = 0; a < n1; ++a)
    for (Eigen::Index b = 0; b < n2; ++b)
      rule.weights[a * n2 + b] = rule.factor1.weights[a] * rule.factor2.weights[b];
  return rule;
}

}  // namespace qcurv
