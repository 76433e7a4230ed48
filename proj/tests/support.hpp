#pragma once

#include <numbers>

#include "qcurv/fields.hpp"
#include "qcurv/geometry.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2 * std::numbers::pi;

inline qcurv::ProductManifold s2xs2(int lmax = 8, double a = 1.0, double b = 1.0) {
  return {qcurv::FactorSpec::sphere(a, lmax), qcurv::FactorSpec::sphere(b, lmax)};
}
inline qcurv::ProductManifold t4(int kmax = 4, double L = kTwoPi) {
  return {qcurv::FactorSpec::torus(L, L, kmax), qcurv::FactorSpec::torus(L, L, kmax)};
}
inline qcurv::ProductManifold s2xt2(int lmax = 8, int kmax = 4, double L = kTwoPi) {
  return {qcurv::FactorSpec::sphere(1.0, lmax), qcurv::FactorSpec::torus(L, L, kmax)};
}
// Sphere times an abstract genus-2 hyperbolic surface of the same |curvature|.
inline qcurv::ProductManifold es_product(int lmax = 8, double a = 1.0) {
  return {qcurv::FactorSpec::sphere(a, lmax), qcurv::FactorSpec::hyperbolic(1.0, 2)};
}

inline qcurv::SectorPtr full(const qcurv::ProductManifold& m) {
  return qcurv::Sector::make(m, qcurv::SectorKind::FullProduct);
}
inline qcurv::SectorPtr factor1(const qcurv::ProductManifold& m) {
  return qcurv::Sector::make(m, qcurv::SectorKind::Factor1Only);
}

// Field whose only nonzero coefficient sits on the factor-1 mode labelled (a, b)
// times the factor-2 constant.
inline qcurv::ScalarField factor1_mode(const qcurv::SectorPtr& s, int a, int b, double c = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(s->size());
  v[s->index(s->basis1().index_of(a, b), 0)] = c;
  return {s, v};
}

}  // namespace testing
