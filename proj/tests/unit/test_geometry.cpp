#include <doctest.h>

#include <cmath>

#include "../oracles/fd.hpp"
#include "../support.hpp"
#include "qcurv/error.hpp"
#include "qcurv/geometry.hpp"

using namespace qcurv;
using testing::kPi;

namespace {

double fd_factor_scalar_curvature(const FactorSpec& f) {
  switch (f.kind()) {
    case FactorKind::Sphere2: {
      const double a = f.radius();
      return 2 * oracle::gauss_curvature([a](double, double) { return a * a; },
                                         [a](double u, double) {
                                           const double s = a * std::sin(u);
                                           return s * s;
                                         },
                                         0.9, 0.3);
    }
    case FactorKind::FlatTorus2:
      return 2 * oracle::gauss_curvature([](double, double) { return 1.0; },
                                         [](double, double) { return 1.0; }, 0.2, 0.4);
    case FactorKind::AbstractHyperbolic2: {
      // Locally isometric to the upper half plane b^2 (dx^2 + dy^2) / y^2.
      const double b = f.scale();
      auto e = [b](double, double y) { return b * b / (y * y); };
      return 2 * oracle::gauss_curvature(e, e, 0.1, 1.3);
    }
  }
  return 0;
}

}  // namespace

TEST_CASE("curvature scalars agree with finite differences of the metric") {
  const std::vector<ProductManifold> cases = {
      testing::s2xs2(2, 1.0, 1.0), testing::s2xs2(2, 0.7, 1.9), testing::t4(2, 3.0),
      testing::s2xt2(2, 2, 5.0),   testing::es_product(2, 1.0),
      {FactorSpec::sphere(1.3, 2), FactorSpec::hyperbolic(0.6, 3)}};
  for (const ProductManifold& m : cases) {
    CAPTURE(m.describe());
    const double r1 = fd_factor_scalar_curvature(m.factor1());
    const double r2 = fd_factor_scalar_curvature(m.factor2());
    const CurvatureData c = curvature_scalars(m);
    CHECK(c.R1 == doctest::Approx(r1).epsilon(1e-7));
    CHECK(c.R2 == doctest::Approx(r2).epsilon(1e-7));
    CHECK(c.R == doctest::Approx(r1 + r2).epsilon(1e-7));
    // Ric = (R_i / 2) g_i on each factor.
    CHECK(c.ricci_norm_sq == doctest::Approx((r1 * r1 + r2 * r2) / 2).epsilon(1e-7));
    CHECK(c.volume == doctest::Approx(m.factor1().area() * m.factor2().area()));
  }
}

TEST_CASE("areas and topology of the factors") {
  CHECK(FactorSpec::sphere(2.0, 1).area() == doctest::Approx(16 * kPi));
  CHECK(FactorSpec::torus(2.0, 3.0, 1).area() == doctest::Approx(6.0));
  // Gauss-Bonnet: area = 2 pi |chi| b^2 for curvature -1/b^2.
  const FactorSpec h = FactorSpec::hyperbolic(1.5, 3);
  CHECK(h.area() == doctest::Approx(2 * kPi * std::abs(h.euler_characteristic()) * 1.5 * 1.5));
  CHECK(h.euler_characteristic() == -4);
  CHECK(h.first_betti() == 6);

  const ProductManifold es = testing::es_product(1);
  CHECK(es.euler_characteristic() == -4);
  CHECK(es.first_betti() == 4);
  CHECK(testing::t4(1).first_betti() == 4);
  CHECK(testing::t4(1).euler_characteristic() == 0);
  CHECK(testing::s2xs2(1).euler_characteristic() == 4);
  CHECK_FALSE(es.grid_backed());
  CHECK(testing::s2xt2(1, 1).grid_backed());
}

TEST_CASE("factories validate their arguments") {
  CHECK_THROWS_AS(FactorSpec::sphere(0.0, 4), Error);
  CHECK_THROWS_AS(FactorSpec::sphere(1.0, -1), Error);
  CHECK_THROWS_AS(FactorSpec::torus(1.0, -2.0, 4), Error);
  CHECK_THROWS_AS(FactorSpec::hyperbolic(1.0, 1), Error);
  CHECK_THROWS_AS(FactorSpec::hyperbolic(1.0, 2, {0.5, 1.0}), Error);
  CHECK_THROWS_AS(FactorSpec::hyperbolic(1.0, 2, {0.0, 2.0, 1.0}), Error);
  CHECK_THROWS_AS(FactorSpec::hyperbolic(1.0, 2, {0.0, 1.0}, 3), Error);
  CHECK_THROWS_AS(factor_kind_from_string("Sphere3"), Error);
  CHECK(factor_kind_from_string("FlatTorus2") == FactorKind::FlatTorus2);
}

TEST_CASE("with_size rescales the hyperbolic spectrum like 1/b^2") {
  const FactorSpec h = FactorSpec::hyperbolic(1.0, 2, {0.0, 0.25, 1.5});
  const FactorSpec h2 = h.with_size(2.0);
  CHECK(h2.scale() == 2.0);
  CHECK(h2.spectrum()[1] == doctest::Approx(0.0625));
  CHECK(h2.spectrum()[2] == doctest::Approx(0.375));
  const FactorSpec t = FactorSpec::torus(2.0, 4.0, 3).with_size(3.0);
  CHECK(t.period2() == doctest::Approx(6.0));
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 9, 17}) {
    const GaussLegendre gl = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double sum = 0;
      for (int i = 0; i < n; ++i) sum += gl.weights[i] * std::pow(gl.nodes[i], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(sum == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
    for (int i = 1; i < n; ++i) CHECK(gl.nodes[i] > gl.nodes[i - 1]);
  }
}

TEST_CASE("factor quadratures integrate trigonometric monomials exactly") {
  // Brute force comparison: closed-form integrals of low-degree monomials.
  const FactorSpec s = FactorSpec::sphere(1.7, 6);
  const FactorQuadrature q = factor_quadrature(s);
  CHECK(q.size() == 7 * 13);
  double area = 0, z2 = 0, x2y2 = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double th = q.coords(i, 0), ph = q.coords(i, 1);
    const double x = std::sin(th) * std::cos(ph), y = std::sin(th) * std::sin(ph);
    const double z = std::cos(th);
    area += q.weights[i];
    z2 += q.weights[i] * z * z;
    x2y2 += q.weights[i] * x * x * y * y;
  }
  const double a2 = 1.7 * 1.7;
  CHECK(area == doctest::Approx(4 * kPi * a2).epsilon(1e-13));
  CHECK(z2 == doctest::Approx(4 * kPi * a2 / 3).epsilon(1e-13));
  CHECK(x2y2 == doctest::Approx(4 * kPi * a2 / 15).epsilon(1e-13));

  const FactorQuadrature t = factor_quadrature(FactorSpec::torus(2.0, 3.0, 3));
  double c = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double u = 2 * kPi * t.coords(i, 0) / 2.0;
    c += t.weights[i] * std::cos(u) * std::cos(u);
  }
  CHECK(t.weights.sum() == doctest::Approx(6.0));
  CHECK(c == doctest::Approx(3.0));
}

TEST_CASE("full-product quadrature requires grid-backed factors") {
  try {
    build_quadrature(testing::es_product(2));
    FAIL("expected AbstractFactorNotGridBacked");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AbstractFactorNotGridBacked);
  }
  const QuadratureRule r = build_quadrature(testing::s2xt2(3, 2));
  CHECK(r.size() == r.factor1.size() * r.factor2.size());
  CHECK(r.weights.sum() == doctest::Approx(4 * kPi * testing::kTwoPi * testing::kTwoPi));
}
