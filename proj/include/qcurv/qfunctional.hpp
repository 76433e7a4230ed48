#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcurv/fields.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/paneitz.hpp"

namespace qcurv {

struct Tolerances {
  double kernel = kDefaultKernelTol;  // zero threshold relative to ||P||
  double gap_ratio = kDefaultGapRatio;
  double functional = 1e-9;   // |Q(u)| against q_scale(u)
  double membership = 1e-9;   // relative distance of f from span N(Q)
  double sign_margin = 1e-10; // pointwise sign tests, relative to sup norms
  double invariance = 1e-8;
};

/// Everything the functional layer needs about one metric g = e^{2w} g0 in
/// the conformal class of a product background g0.
class QContext {
 public:
  static QContext make(const SectorPtr& sector, std::optional<ConformalFactor> omega = std::nullopt,
                       const Tolerances& tol = {});

  /// Context of e^{2 omega} g (omega relative to this context's metric).
  QContext rescaled(const ConformalFactor& omega) const;

  const SectorPtr& sector_ptr() const { return sector_; }
  const Sector& sector() const { return *sector_; }
  const ProductManifold& manifold() const { return sector_->manifold(); }
  const Tolerances& tolerances() const { return tol_; }
  /// Total conformal factor relative to the background (empty for g0).
  const std::optional<ConformalFactor>& omega() const { return omega_; }
  const std::string& metric_tag() const { return q_.metric_tag; }
  const QField& q() const { return q_; }
  const MeasureWeights& measure() const { return measure_; }
  const PaneitzOperator& background_operator() const { return p0_; }
  /// P of this metric (matrix-free when rescaled).
  const PaneitzOperator& p() const { return p_; }
  /// N(P); conformally invariant, computed from the background symbol.
  const KernelBasis& kernel() const { return kernel_; }

  double volume() const { return volume_; }
  double k_q() const { return k_q_; }
  /// sup |Q| of this metric.
  double q_sup() const { return q_sup_; }
  /// Largest sup |Q| seen along the chain of rescalings that produced this
  /// context. Tolerances use it so that a context whose Q has been driven to
  /// round-off level is not judged against its own noise.
  double q_reference() const { return q_ref_; }
  /// Cauchy-Schwarz scale of |int u Q mu|: q_reference * ||u|| * sqrt(Vol).
  double q_scale(const ScalarField& u) const;

 private:
  QContext(SectorPtr sector, const Tolerances& tol, std::optional<ConformalFactor> omega, QField q,
           PaneitzOperator p0, PaneitzOperator p, KernelBasis kernel, double parent_ref);

  SectorPtr sector_;
  Tolerances tol_;
  std::optional<ConformalFactor> omega_;
  QField q_;
  MeasureWeights measure_;
  PaneitzOperator p0_;
  PaneitzOperator p_;
  KernelBasis kernel_;
  double volume_ = 0;
  double k_q_ = 0;
  double q_sup_ = 0;
  double q_ref_ = 0;
};

/// Relative residual ||P u|| / (||P|| ||u||) over the background symbol.
double kernel_residual(const QContext& ctx, const ScalarField& u);

/// int u Q dmu of the context's metric. Throws NotInKernel unless u in N(P).
double q_functional(const QContext& ctx, const ScalarField& u);
/// Same integral without the kernel check (the functional on all of C^inf).
double q_pairing(const QContext& ctx, const ScalarField& f);

struct NQBasis {
  std::vector<ScalarField> fields;  // orthonormal, background inner product
  int codim_in_np = 0;
  Eigen::VectorXd functional_on_kernel;  // Q(b_j) over the kernel basis
  double tolerance = 0;                  // threshold applied to ||Q(b)||
};

NQBasis nq_basis(const QContext& ctx);

struct Decomposition {
  double u0 = 0;  // the constant value Q(u)/k_Q
  ScalarField u1;
  double q_of_u = 0;
  double k_q = 0;
  double u1_residual = 0;  // |Q(u1)| / q_scale(u1)
};

/// u = u0 + u1 with u0 constant and u1 in N(Q). Throws KQZero when |k_Q| is
/// within tolerance of zero.
Decomposition decompose(const QContext& ctx, const ScalarField& u);

struct HodgeComparison {
  double u0 = 0;
  double mean = 0;  // mean of u in the context's measure
  double difference = 0;  // ||u0 - mean|| / ||u||
  bool agree = false;
};

/// Throws NotConstantQ when Q varies by more than tolerances().invariance.
HodgeComparison hodge_compare(const QContext& ctx, const ScalarField& u);

enum class Verdict { InNullQ, SignVsKQ, FCertificate, NoCertificate };
std::string to_string(Verdict v);

struct ForbiddenCertificate {
  Verdict verdict = Verdict::NoCertificate;
  std::optional<ScalarField> witness;
  double k_q = 0;
  double membership_residual = 0;  // ||f - proj_N(Q) f|| / ||f||
  double f_min = 0;
  double f_max = 0;
  double sign_margin = 0;
  double witness_integral = 0;     // int f u dmu
  double witness_min_product = 0;  // min f u over nodes and check points
  double integral_margin = 0;
  int candidates = 0;
  bool heuristic = false;  // witness search covered a grid of the unit sphere
  std::string reason;
};

/// Sufficient certificates that no metric in the class has Q = alpha f.
/// Checks, in order, membership in N(Q), sign against k_Q, and an f.u >= 0
/// witness in N(Q). NoCertificate makes no claim either way.
ForbiddenCertificate forbidden_certificate(const QContext& ctx, const ScalarField& f);

/// The f.u >= 0 test for a given witness u in N(Q).
ForbiddenCertificate f_certificate(const QContext& ctx, const ScalarField& f, const ScalarField& u);

struct ForbiddenFamily {
  std::vector<int> exponents;
  std::vector<ScalarField> fields;
  std::vector<ForbiddenCertificate> certificates;
  Eigen::MatrixXd gram;  // of the unit-normalized family
  Eigen::VectorXd singular_values;
  int rank = 0;
};

/// u^p for odd positive p. Throws ConstantInput for constant u.
ForbiddenFamily forbidden_family(const QContext& ctx, const ScalarField& u,
                                 const std::vector<int>& exponents, double rank_tol = 1e-6);

struct ObstructionResult {
  bool obstructed = false;  // CertifiedObstructed vs NoCertificate
  std::optional<ScalarField> witness;
  double best_min = 0;  // max over the search of min u / ||u||_inf
  int dim_nq = 0;
  int candidates = 0;
  bool heuristic = false;
  std::string method;
};

/// Searches N(Q) for a nonzero pointwise nonnegative element (no metric with
/// constant Q when k_Q != 0). With k_Q = 0 the question is whether Q = 0 is
/// attainable, decided by the Fredholm integrals. `injected` replaces the
/// computed N(Q).
ObstructionResult constant_q_obstruction(const QContext& ctx,
                                         const std::optional<NQBasis>& injected = std::nullopt,
                                         double step_degrees = 5.0);

struct CapReport {
  std::vector<double> values;  // int f Q_hat dmu_hat per sample
  double max_residual = 0;
  double scale = 0;            // q_scale(f) of the context
};

/// max over the samples of |int f Q dmu| after rescaling by each omega.
CapReport verify_cap(const QContext& ctx, const ScalarField& f,
                     const std::vector<ConformalFactor>& omegas);

struct HarmonicReport {
  int dim_nd = 1;
  int dim_np = 0;
  int dim_dnp = 0;
  int b1 = 0;
  bool strong_0_regular = false;
  bool injection_dimensions_consistent = false;  // dim dN(P) <= b1
  std::string scope;
  std::string proof_note;
};

HarmonicReport harmonic_report(const QContext& ctx);

/// Unit vectors of R^d spaced about `step` radians apart (hyperspherical grid).
std::vector<Eigen::VectorXd> unit_sphere_grid(int d, double step);

}  // namespace qcurv
