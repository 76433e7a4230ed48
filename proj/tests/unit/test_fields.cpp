#include <doctest.h>

#include <cmath>

#include "../oracles/fd.hpp"
#include "../support.hpp"
#include "qcurv/error.hpp"
#include "qcurv/fields.hpp"

using namespace qcurv;
using testing::kPi;
using testing::kTwoPi;

namespace {

// Real spherical harmonic from the standard library's associated Legendre.
double real_ylm(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  const double p = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), theta);
  if (m == 0) return p;
  return std::sqrt(2.0) * p * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

}  // namespace

TEST_CASE("sphere basis matches the standard-library spherical harmonics") {
  const FactorSpec f = FactorSpec::sphere(1.4, 6);
  const FactorBasis b(f);
  for (auto [t, p] : {std::pair{0.3, 1.1}, {1.7, 4.0}, {2.9, 0.2}}) {
    const Eigen::VectorXd v = b.evaluate(t, p);
    for (int l = 0; l <= 6; ++l)
      for (int m = -l; m <= l; ++m) {
        CAPTURE(l);
        CAPTURE(m);
        CHECK(v[b.index_of(l, m)] == doctest::Approx(real_ylm(l, m, t, p) / 1.4).scale(1.0));
      }
  }
}

TEST_CASE("basis eigenvalues agree with a finite-difference Laplacian") {
  const double a = 0.8;
  const FactorBasis b(FactorSpec::sphere(a, 5));
  for (int i = 1; i < b.size(); i += 3) {
    const oracle::Fn2 f = [&b, i](double t, double p) { return b.evaluate(t, p)[i]; };
    const double th = 1.1, ph = 2.3;
    const double fd = oracle::sphere_laplacian(f, a, th, ph);
    CHECK(fd == doctest::Approx(b.eigenvalue(i) * f(th, ph)).epsilon(1e-6).scale(1e-3));
  }
  // Torus: Delta = -(d_xx + d_yy).
  const FactorBasis t(FactorSpec::torus(2.0, 3.0, 3));
  for (int i = 0; i < t.size(); i += 5) {
    const oracle::Fn2 f = [&t, i](double x, double y) { return t.evaluate(x, y)[i]; };
    const double fd =
        -(oracle::du(oracle::du(f, 1e-3), 1e-3)(0.4, 1.9) + oracle::dv(oracle::dv(f, 1e-3), 1e-3)(0.4, 1.9));
    CHECK(fd == doctest::Approx(t.eigenvalue(i) * f(0.4, 1.9)).epsilon(1e-6).scale(1e-3));
  }
}

TEST_CASE("factor bases are orthonormal under their quadrature") {
  for (const FactorSpec& f : {FactorSpec::sphere(1.3, 7), FactorSpec::torus(2.0, 5.0, 4)}) {
    const FactorBasis b(f);
    const FactorQuadrature q = factor_quadrature(f);
    const RowMatrix t = b.table(q.coords);
    const Eigen::MatrixXd g = t.transpose() * q.weights.asDiagonal() * t;
    CHECK((g - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("synthesis and analysis are inverse on bandlimited coefficients") {
  for (const ProductManifold& m : {testing::s2xt2(6, 3), testing::s2xs2(5), testing::t4(3)}) {
    const SectorPtr s = testing::full(m);
    Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(s->size(), -1.0, 2.0);
    c = c.array().sin();
    const ScalarField f(s, c);
    const ScalarField back = analyze(synthesize(f), s);
    CHECK((back.coeffs() - c).cwiseAbs().maxCoeff() < 1e-12);
    // Off-grid evaluation agrees with the precomputed check tables.
    const Eigen::VectorXd chk = check_values(*s, c);
    for (Eigen::Index j = 0; j < 5; ++j) {
      const double v = evaluate_at(*s, c, {s->check_coords1()(j, 0), s->check_coords1()(j, 1)},
                                   {s->check_coords2()(j, 0), s->check_coords2()(j, 1)});
      CHECK(v == doctest::Approx(chk[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("integrals and inner products in the background measure") {
  const SectorPtr s = testing::full(testing::s2xt2(6, 3, 3.0));
  const MeasureWeights mu = background_measure(s);
  const double vol = 4 * kPi * 9.0;
  CHECK(integral(ScalarField::constant(s, 2.5), mu) == doctest::Approx(2.5 * vol));
  CHECK(l2_norm(ScalarField::basis(s, 17), mu) == doctest::Approx(1.0));
  CHECK(inner_product(ScalarField::basis(s, 3), ScalarField::basis(s, 4), mu) ==
        doctest::Approx(0.0).scale(1.0));

  // Factor1Only sector: constant along factor 2, weights carry its area.
  const SectorPtr f1 = testing::factor1(testing::es_product(6));
  const MeasureWeights m1 = background_measure(f1);
  CHECK(integral(ScalarField::constant(f1, 1.0), m1) == doctest::Approx(f1->volume()));
  CHECK(f1->volume() == doctest::Approx(4 * kPi * 4 * kPi));
}

TEST_CASE("pointwise maps keep exact point values and measure aliasing") {
  const SectorPtr s = testing::full(testing::t4(4));
  const ScalarField w = random_bandlimited(s, 5);
  const ScalarField sq = multiply(w, w);
  const Eigen::VectorXd nodal = synthesize(w);
  CHECK((synthesize(sq) - nodal.cwiseProduct(nodal)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(sq.aliasing() < 1e-12);  // degree doubles but stays inside kmax

  // |x| is not bandlimited: projection error is reported.
  CHECK_THROWS_AS(pointwise_map(w, [](double x) { return std::abs(x); }), Error);
  const ScalarField ab = pointwise_map(w, [](double x) { return std::abs(x); }, kNoAliasingLimit);
  CHECK(ab.aliasing() > 1e-6);
  CHECK(ab.has_point_values());
  CHECK(synthesize(ab).minCoeff() >= 0.0);
}

TEST_CASE("random bandlimited fields are seeded and scaled") {
  const SectorPtr s = testing::full(testing::s2xs2(9));
  BandlimitOptions opts;
  opts.amplitude = 0.2;
  const ScalarField a = random_bandlimited(s, 42, opts);
  const ScalarField b = random_bandlimited(s, 42, opts);
  const ScalarField c = random_bandlimited(s, 43, opts);
  CHECK(a.coeffs() == b.coeffs());
  CHECK(a.coeffs() != c.coeffs());
  CHECK(synthesize(a).cwiseAbs().maxCoeff() == doctest::Approx(0.2));
  CHECK(a.coeffs()[0] == 0.0);  // zero mean
  // Modes above the bandlimit (degree 3) stay empty.
  for (Eigen::Index i = 0; i < s->size(); ++i) {
    const Mode md = s->mode(i);
    if (s->basis1().degree(md.i1) > 3 || s->basis2().degree(md.i2) > 3) CHECK(a.coeffs()[i] == 0.0);
  }
}

TEST_CASE("conformal factors compose additively and rescale the volume") {
  const SectorPtr s = testing::full(testing::s2xt2(10, 5));
  const ConformalFactor w1(random_bandlimited(s, 1));
  const ConformalFactor w2(random_bandlimited(s, 2));
  CHECK(w1.aliasing() < kConformalAliasingLimit);
  const ConformalFactor w12 = compose(w1, w2);
  CHECK((w12.omega().coeffs() - w1.omega().coeffs() - w2.omega().coeffs()).norm() < 1e-15);

  // Brute-force volume of e^{2w} g: sum of e^{4w} over a fine product grid.
  const MeasureWeights mu = conformal_measure(w1);
  const double vol = integral(ScalarField::constant(s, 1.0), mu);
  const QuadratureRule fine =
      build_quadrature(ProductManifold(FactorSpec::sphere(1.0, 30), FactorSpec::torus(kTwoPi, kTwoPi, 12)));
  // omega on the fine grid as B1 C B2^T, basis functions evaluated point by point.
  auto table = [](const FactorQuadrature& q, const FactorBasis& b) {
    Eigen::MatrixXd t(q.size(), b.size());
    for (Eigen::Index a = 0; a < q.size(); ++a) t.row(a) = b.evaluate(q.coords(a, 0), q.coords(a, 1));
    return t;
  };
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> coef(
      w1.omega().coeffs().data(), s->basis1().size(), s->basis2().size());
  const Eigen::MatrixXd v = table(fine.factor1, s->basis1()) * coef * table(fine.factor2, s->basis2()).transpose();
  const double brute = fine.factor1.weights.transpose() * (4 * v.array()).exp().matrix() * fine.factor2.weights;
  CHECK(vol == doctest::Approx(brute).epsilon(1e-9));

  const ConformalFactor c = ConformalFactor::constant(s, 0.25);
  CHECK(integral(ScalarField::constant(s, 1.0), conformal_measure(c)) ==
        doctest::Approx(std::exp(1.0) * s->volume()));
}

TEST_CASE("large conformal factors are rejected when e^{2w} aliases") {
  const SectorPtr s = testing::full(testing::t4(3));
  BandlimitOptions opts;
  opts.amplitude = 3.0;
  opts.fraction = 1.0;
  CHECK_THROWS_AS(ConformalFactor(random_bandlimited(s, 9, opts)), Error);
}

TEST_CASE("fields from different sectors do not mix") {
  const SectorPtr a = testing::full(testing::t4(2));
  const SectorPtr b = testing::full(testing::t4(3));
  try {
    (void)(ScalarField::constant(a, 1.0) + ScalarField::constant(b, 1.0));
    FAIL("expected SectorMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorMismatch);
  }
  CHECK_THROWS_AS(ScalarField(a, Eigen::VectorXd::Zero(3)), Error);
}
