#include <doctest.h>

#include <cmath>

#include "../support.hpp"
#include "qcurv/error.hpp"
#include "qcurv/paneitz.hpp"
#include "qcurv/prescribe.hpp"

using namespace qcurv;
using testing::kPi;

TEST_CASE("Q-flat solve on a perturbed flat torus recovers the flat metric") {
  const SectorPtr s = testing::full(testing::t4(5));
  const PaneitzOperator p0 = assemble_background(s);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CAPTURE(seed);
    const ConformalFactor w0(random_bandlimited(s, seed));
    const QContext ctx = QContext::make(s, w0);
    const PrescriptionResult r = solve_q_flat(ctx);
    const double scale = synthesize(p0.apply(w0.omega())).cwiseAbs().maxCoeff();
    CHECK(r.residual <= 1e-6 * scale);

    // Independent check: Q of e^{2(w0 + w)} g computed from the background.
    const ConformalFactor total = compose(w0, r.omega, kNoAliasingLimit);
    const QField q = q_transform(q_background(s), total, p0);
    CHECK(synthesize(q.q).cwiseAbs().maxCoeff() <= 1e-6 * scale);
    // Delta^2 (w0 + w) = 0 on T^4: the total factor is constant.
    const Eigen::VectorXd tv = synthesize(total.omega());
    CHECK(tv.maxCoeff() - tv.minCoeff() <= 1e-10);
    // Minimum-norm normalization: w is orthogonal to the constants in mu_ghat.
    CHECK(std::abs(integral(r.omega.omega(), ctx.measure())) <=
          1e-12 * l2_norm(r.omega.omega(), ctx.measure()) * std::sqrt(ctx.volume()));
  }
}

TEST_CASE("Q-flat solve refuses classes with nonzero total Q-curvature") {
  for (const ProductManifold& m : {testing::s2xs2(8), testing::s2xt2(10, 5)}) {
    CAPTURE(m.describe());
    const SectorPtr s = testing::full(m);
    for (bool rescale : {false, true}) {
      const QContext ctx = rescale ? QContext::make(s, ConformalFactor(random_bandlimited(s, 4)))
                                   : QContext::make(s);
      try {
        solve_q_flat(ctx);
        FAIL("expected FredholmViolation");
      } catch (const FredholmViolation& e) {
        CHECK(e.code() == ErrorCode::FredholmViolation);
        const double kq = q_background_value(m) * m.volume();
        CHECK(e.integral_against_one() == doctest::Approx(kq).epsilon(1e-9));
        // The kernel is the normalized constant 1 / sqrt(Vol).
        REQUIRE(e.integrals().size() == 1);
        CHECK(std::abs(e.integrals()[0]) == doctest::Approx(std::abs(kq) / std::sqrt(m.volume())));
        CHECK(e.tolerance() < std::abs(e.integrals()[0]));
      }
    }
  }
}

TEST_CASE("constant-Q iteration on S2 x S2") {
  const SectorPtr s = testing::full(testing::s2xs2(10));
  const PaneitzOperator p0 = assemble_background(s);
  const ConformalFactor w0(random_bandlimited(s, 21));
  const QContext ctx = QContext::make(s, w0);
  for (double target : {2.0 / 3.0, 1.5}) {
    CAPTURE(target);
    const PrescriptionResult r = iterate_constant_q(ctx, target);
    CHECK(r.iterations > 0);
    CHECK(r.residual <= 1e-5 * target);
    REQUIRE(!r.trace.empty());
    CHECK(r.trace.back().residual <= 1e-5);
    // Recompute Q of the resulting metric from scratch.
    const ConformalFactor total = compose(w0, r.omega, kNoAliasingLimit);
    const QField q = q_transform(q_background(s), total, p0);
    const Eigen::VectorXd qv = synthesize(q.q);
    CHECK((qv.array() - target).abs().maxCoeff() <= 1e-5 * target);
    // Volume is fixed by Gauss-Bonnet-type invariance: target * Vol = k_Q.
    const double vol = integral(ScalarField::constant(s, 1.0), conformal_measure(total));
    CHECK(target * vol == doctest::Approx(ctx.k_q()).epsilon(1e-5));
  }
}

TEST_CASE("constant-Q iteration returns a perturbed ES product to Q = -2") {
  const SectorPtr s = testing::factor1(testing::es_product(16));
  const PaneitzOperator p0 = assemble_background(s);
  const ConformalFactor w0(random_bandlimited(s, 9));
  const PrescriptionResult r = iterate_constant_q(QContext::make(s, w0), -2.0);
  CHECK(r.residual <= 1e-5 * 2);
  const ConformalFactor total = compose(w0, r.omega, kNoAliasingLimit);
  const Eigen::VectorXd q = synthesize(q_transform(q_background(s), total, p0).q);
  CHECK((q.array() + 2.0).abs().maxCoeff() <= 1e-5 * 2);
  // k_Q = -32 pi^2 fixes the volume: -2 Vol = k_Q.
  const double vol = integral(ScalarField::constant(s, 1.0), conformal_measure(total));
  CHECK(vol == doctest::Approx(16 * kPi * kPi).epsilon(1e-5));
}

TEST_CASE("constant-Q iteration error paths") {
  const SectorPtr s = testing::full(testing::s2xs2(8));
  const QContext ctx = QContext::make(s, ConformalFactor(random_bandlimited(s, 5)));
  auto code = [&](const QContext& c, double target, ConstantQOptions o = {}) {
    try {
      iterate_constant_q(c, target, o);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code(ctx, -1.0) == ErrorCode::SignMismatch);
  CHECK(code(ctx, 0.0) == ErrorCode::SignMismatch);
  const SectorPtr t = testing::full(testing::t4(3));
  CHECK(code(QContext::make(t), 1.0) == ErrorCode::SignMismatch);

  ConstantQOptions few;
  few.max_iter = 1;
  try {
    iterate_constant_q(ctx, 1.0, few);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.trace().size() == 2);
    CHECK(e.trace().back().residual > few.rel_tol);
  }
}

TEST_CASE("Fredholm integrals of a Q-flat class vanish") {
  const SectorPtr s = testing::full(testing::t4(5));
  const FredholmCheck fc = fredholm_check(QContext::make(s, ConformalFactor(random_bandlimited(s, 8))));
  CHECK(fc.satisfied);
  CHECK(std::abs(fc.against_one) <= fc.tolerance * std::sqrt(s->volume()) + 1e-12);
}
