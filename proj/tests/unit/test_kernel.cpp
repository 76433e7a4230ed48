#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support.hpp"
#include "qcurv/error.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/paneitz.hpp"

using namespace qcurv;

namespace {

// lambda of the l = 1 modes on S^2(a) x Hyp(1), from the symbol.
double l1_eigenvalue(double a) {
  const ProductManifold m = testing::es_product(1, a);
  const SymbolCoefficients c = symbol_coefficients(curvature_scalars(m));
  return symbol_value(2 / (a * a), 0.0, c);
}

}  // namespace

TEST_CASE("spectrum split and gap certification") {
  Eigen::VectorXd ev(5);
  ev << 0.0, 3e-13, 1.0, -2.0, 4.0;
  const SpectrumSplit s = split_spectrum(ev, 1e-9, 1e3);
  CHECK(s.zero == std::vector<Eigen::Index>{0, 1});
  CHECK(s.norm == 4.0);
  CHECK(s.threshold == doctest::Approx(4e-9));
  CHECK(s.gap == 1.0);
  CHECK(s.certified);

  ev << 0.0, 1e-7, 1.0, -2.0, 4.0;
  const SpectrumSplit u = split_spectrum(ev, 1e-9, 1e3);
  CHECK(u.zero.size() == 1);
  CHECK_FALSE(u.certified);
}

TEST_CASE("kernel dimensions of the background products") {
  struct Case {
    ProductManifold m;
    SectorKind kind;
    int dim;
    const char* scope;
  };
  const std::vector<Case> cases = {
      {testing::s2xs2(6), SectorKind::FullProduct, 1, "full"},
      {testing::t4(3), SectorKind::FullProduct, 1, "full"},
      {testing::s2xt2(6, 3), SectorKind::FullProduct, 1, "full"},
      {testing::es_product(8), SectorKind::Factor1Only, 4, "sector-certified"},
      {testing::es_product(8, 1.2), SectorKind::Factor1Only, 1, "sector-certified"},
  };
  for (const Case& c : cases) {
    CAPTURE(c.m.describe());
    const SectorPtr s = Sector::make(c.m, c.kind);
    const KernelBasis k = kernel_basis(assemble_background(s));
    CHECK(k.dim == c.dim);
    CHECK(k.scope == c.scope);
    CHECK(k.fields.size() == static_cast<std::size_t>(c.dim));
    // Constants first; the basis is orthonormal and annihilated by P.
    CHECK(std::abs(k.fields[0].coeffs()[0]) == doctest::Approx(1.0));
    const PaneitzOperator p = assemble_background(s);
    for (std::size_t i = 0; i < k.fields.size(); ++i) {
      CHECK(p.apply(k.fields[i]).coeffs().norm() <= 1e-12 * p.norm());
      for (std::size_t j = 0; j < k.fields.size(); ++j)
        CHECK(k.fields[i].coeffs().dot(k.fields[j].coeffs()) ==
              doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0));
    }
  }
}

TEST_CASE("the ES kernel is spanned by constants and the first spherical harmonics") {
  const SectorPtr s = testing::factor1(testing::es_product(8));
  const KernelBasis k = kernel_basis(assemble_background(s));
  REQUIRE(k.dim == 4);
  CHECK(k.proof_note.proven);
  for (int i = 1; i < 4; ++i) {
    const Eigen::VectorXd& c = k.fields[static_cast<std::size_t>(i)].coeffs();
    for (Eigen::Index j = 0; j < c.size(); ++j)
      if (std::abs(c[j]) > 1e-14) CHECK(s->basis1().degree(s->mode(j).i1) == 1);
  }
}

TEST_CASE("off-sector positivity is not claimed when factor-1 modes go negative") {
  const ProductManifold m = testing::es_product(8, 2.5);
  const SectorPtr s = testing::factor1(m);
  const PositivityNote n = off_sector_positivity(*s, symbol_coefficients(curvature_scalars(m)));
  CHECK_FALSE(n.proven);
  CHECK(n.text.find("not proven") != std::string::npos);
}

TEST_CASE("near-degenerate eigenvalues raise IndeterminateGap") {
  // Choose a so that the l = 1 eigenvalue sits 100 thresholds above zero.
  const SectorPtr s1 = testing::factor1(testing::es_product(8));
  const double threshold = kDefaultKernelTol * assemble_background(s1).norm();
  double a = 1.0 - 1e-6;
  for (int i = 0; i < 60; ++i) {
    const double lam = l1_eigenvalue(a);
    if (lam > 100 * threshold) a = (a + 1.0) / 2;
    else if (lam < 50 * threshold) a -= (1.0 - a);
    else break;
  }
  const double lam = l1_eigenvalue(a);
  REQUIRE(lam > 10 * threshold);
  REQUIRE(lam < 1e3 * threshold);
  const SectorPtr s = testing::factor1(testing::es_product(8, a));
  try {
    kernel_basis(assemble_background(s));
    FAIL("expected IndeterminateGap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndeterminateGap);
  }
}

TEST_CASE("kernel dimension is stable under conformal rescaling") {
  for (const ProductManifold& m : {testing::s2xs2(4), testing::s2xt2(4, 2)}) {
    const SectorPtr s = testing::full(m);
    const PaneitzOperator p0 = assemble_background(s);
    const KernelBasis k = kernel_basis(p0);
    for (std::uint64_t seed : {11u, 12u}) {
      const ConformalFactor w(random_bandlimited(s, seed), kNoAliasingLimit);
      const StabilityReport r = check_conformal_stability(k, p0, w);
      CHECK(r.dim_rescaled == r.dim_background);
      CHECK(r.max_residual <= 10 * kDefaultKernelTol);
      const KernelBasis kh = kernel_basis(conformal_paneitz(p0, w));
      CHECK(span_distance(k, kh) < 1e-8);
    }
  }
  // Four-dimensional kernel of the ES product under sphere-only rescalings.
  const SectorPtr es = testing::factor1(testing::es_product(13));
  const PaneitzOperator p0 = assemble_background(es);
  const KernelBasis k = kernel_basis(p0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ConformalFactor w(random_bandlimited(es, seed));
    const StabilityReport r = check_conformal_stability(k, p0, w);
    CHECK(r.dim_rescaled == 4);
    const KernelBasis kh = kernel_basis(conformal_paneitz(p0, w));
    CHECK(kh.dim == 4);
    CHECK(span_distance(k, kh) < 1e-8);
  }
}

TEST_CASE("span distance") {
  const SectorPtr s = testing::factor1(testing::es_product(4));
  const KernelBasis a = kernel_basis(assemble_background(s));
  CHECK(span_distance(a, a) < 1e-15);
  const KernelBasis b = kernel_basis(assemble_background(testing::factor1(testing::es_product(4, 1.3))));
  CHECK(span_distance(a, b) == std::numeric_limits<double>::infinity());
}

TEST_CASE("kernel scan localizes the dimension jump at a = 1") {
  const ScanFamily fam{testing::es_product(16), 1, SectorKind::Factor1Only};
  const ScanResult r = scan_parameter(fam, 0.5, 1.5, 101);
  REQUIRE(r.steps.size() == 101);
  for (const ScanStep& st : r.steps) {
    CAPTURE(st.param);
    CHECK(st.dim == (std::abs(st.param - 1.0) < 1e-12 ? 4 : 1));
  }
  const ScanStep& mid = r.steps[50];
  const double norm = assemble_background(testing::factor1(testing::es_product(16))).norm();
  CHECK(mid.min_abs_lambda <= 1e-9 * norm);
  // The l = 1 eigenvalue changes sign through a = 1.
  CHECK(r.steps[49].nearest_lambda > 0);
  CHECK(r.steps[51].nearest_lambda < 0);
  REQUIRE(r.brackets.size() == 2);
  CHECK(r.brackets[0].hi == doctest::Approx(1.0));
  CHECK(r.brackets[1].lo == doctest::Approx(1.0));
  CHECK(r.brackets[0].kind == "dim-change");
}

TEST_CASE("scan steps match kernels computed from assembled operators") {
  const ScanFamily fam{testing::s2xt2(5, 2, 2.0), 2, SectorKind::FullProduct};
  const ScanResult r = scan_parameter(fam, 1.0, 8.0, 8);
  for (const ScanStep& st : r.steps) {
    const ProductManifold m(fam.base.factor1(), fam.base.factor2().with_size(st.param));
    const KernelBasis k = kernel_basis(assemble_background(testing::full(m)));
    CHECK(k.dim == st.dim);
  }
}
