#include "qcurv/prescribe.hpp"

#include <cmath>

namespace qcurv {

namespace {

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double sup_deviation(const ScalarField& q, double target) {
  const PointValues p = point_values(q);
  return std::max((p.nodal.array() - target).abs().maxCoeff(),
                  (p.check.array() - target).abs().maxCoeff());
}

// Kernel modes of the background symbol (they are coordinate vectors).
std::vector<bool> kernel_mask(const QContext& ctx) {
  const Eigen::VectorXd& lambda = ctx.background_operator().symbol();
  const double thr = ctx.kernel().threshold;
  std::vector<bool> mask(static_cast<std::size_t>(lambda.size()));
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    mask[static_cast<std::size_t>(i)] = std::abs(lambda[i]) <= thr;
  return mask;
}

Eigen::VectorXd pseudo_solve(const QContext& ctx, const Eigen::VectorXd& rhs,
                             const std::vector<bool>& mask) {
  const Eigen::VectorXd& lambda = ctx.background_operator().symbol();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  for (Eigen::Index i = 0; i < rhs.size(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) x[i] = rhs[i] / lambda[i];
  return x;
}

}  // namespace

FredholmViolation::FredholmViolation(const std::string& message, Eigen::VectorXd integrals,
                                     double against_one, double tolerance)
    : Error(ErrorCode::FredholmViolation, message),
      integrals_(std::move(integrals)),
      against_one_(against_one),
      tolerance_(tolerance) {}

NonConvergence::NonConvergence(const std::string& message, std::vector<IterationRecord> trace)
    : Error(ErrorCode::NonConvergence, message), trace_(std::move(trace)) {}

FredholmCheck fredholm_check(const QContext& ctx) {
  const KernelBasis& kb = ctx.kernel();
  FredholmCheck fc;
  fc.integrals.resize(kb.dim);
  double scale = 0;
  for (int j = 0; j < kb.dim; ++j) {
    const ScalarField& u = kb.fields[static_cast<std::size_t>(j)];
    fc.integrals[j] = q_functional(ctx, u);
    scale = std::max(scale, ctx.q_scale(u));
  }
  fc.tolerance = ctx.tolerances().functional * scale;
  fc.against_one = ctx.k_q();
  fc.satisfied = fc.integrals.size() == 0 || fc.integrals.cwiseAbs().maxCoeff() <= fc.tolerance;
  return fc;
}

PrescriptionResult solve_q_flat(const QContext& ctx) {
  require_grid(ctx.sector(), "solve_q_flat");
  const FredholmCheck fc = fredholm_check(ctx);
  if (!fc.satisfied)
    throw FredholmViolation("int Q u dmu does not vanish on N(P) (k_Q = " +
                                sci(fc.against_one) + "): no Q-flat metric in the class",
                            fc.integrals, fc.against_one, fc.tolerance);
  const SectorPtr& sp = ctx.sector_ptr();

  // P^ghat = e^{-4 w0} P^g, so P^ghat w = -Q^ghat is P^g w = -e^{4 w0} Q^ghat.
  const PointValues q = point_values(ctx.q().q);
  Eigen::VectorXd rhs_nodal = q.nodal;
  if (ctx.omega()) rhs_nodal = rhs_nodal.cwiseProduct(ctx.omega()->exp_nodal(4.0));
  const Eigen::VectorXd rhs = analyze(rhs_nodal, sp).coeffs();
  ScalarField w(sp, -pseudo_solve(ctx, rhs, kernel_mask(ctx)));

  // Minimum norm in the context measure: remove the N(P) component.
  const KernelBasis& kb = ctx.kernel();
  if (kb.dim > 0) {
    Eigen::MatrixXd G(kb.dim, kb.dim);
    Eigen::VectorXd h(kb.dim);
    for (int j = 0; j < kb.dim; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      h[j] = inner_product(w, kb.fields[sj], ctx.measure());
      for (int k = 0; k <= j; ++k)
        G(j, k) = G(k, j) =
            inner_product(kb.fields[sj], kb.fields[static_cast<std::size_t>(k)], ctx.measure());
    }
    const Eigen::VectorXd alpha = G.ldlt().solve(h);
    Eigen::VectorXd c = w.coeffs();
    for (int j = 0; j < kb.dim; ++j) c -= alpha[j] * kb.fields[static_cast<std::size_t>(j)].coeffs();
    w = ScalarField(sp, std::move(c));
  }

  ConformalFactor cf(w, kNoAliasingLimit);
  const QField q_new = q_transform(ctx.q(), cf, ctx.p());
  PrescriptionResult r{cf, sup_deviation(q_new.q, 0.0), 0.0, 0, fc.integrals, fc.tolerance, {}};
  return r;
}

PrescriptionResult iterate_constant_q(const QContext& ctx, double target,
                                      const ConstantQOptions& opts) {
  require_grid(ctx.sector(), "iterate_constant_q");
  const double kq = ctx.k_q();
  const ScalarField one = ScalarField::constant(ctx.sector_ptr(), 1.0);
  const bool kq0 = std::abs(kq) <= ctx.tolerances().functional * ctx.q_scale(one);
  if (target == 0 || kq0 || (kq > 0) != (target > 0))
    fail(ErrorCode::SignMismatch,
         "target " + sci(target) + " and k_Q = " + sci(kq) +
             " must share a strict sign (target * int e^{4w} dmu = k_Q)" +
             (target == 0 ? "; use solve-qflat for Q = 0" : ""));
  if (!(opts.damping > 0 && opts.damping <= 1) || opts.max_iter < 0)
    fail(ErrorCode::InvalidArgument, "damping must lie in (0, 1] and max_iter >= 0");

  const SectorPtr& sp = ctx.sector_ptr();
  const Sector& s = *sp;
  const std::vector<bool> mask = kernel_mask(ctx);
  const double qg = q_background_value(s.manifold());
  const Eigen::VectorXd w0 =
      ctx.omega() ? ctx.omega()->omega().coeffs() : Eigen::VectorXd::Zero(s.size());
  const Eigen::VectorXd& wts = s.weights();
  const double c0 = std::sqrt(s.volume());  // coefficient of the constant 1

  // v is the total factor relative to the background metric.
  Eigen::VectorXd v = w0;
  std::vector<IterationRecord> trace;
  Eigen::VectorXd kernel_part;
  for (int k = 0;; ++k) {
    // Volume renormalization: target * int e^{4v} dmu_g = k_Q.
    Eigen::VectorXd e = synthesize_coeffs(s, v).unaryExpr([](double x) { return std::exp(4 * x); });
    const double vol_hat = kernels::weighted_dot(wts, e, Eigen::VectorXd::Ones(e.size()));
    const double shift = 0.25 * std::log(kq / (target * vol_hat));
    v[0] += shift * c0;
    e *= std::exp(4 * shift);

    const ConformalFactor rel(ScalarField(sp, v - w0), kNoAliasingLimit);
    const QField qn = q_transform(ctx.q(), rel, ctx.p());
    IterationRecord rec;
    rec.iteration = k;
    rec.residual = sup_deviation(qn.q, target) / std::abs(target);
    if (rec.residual <= opts.rel_tol) {
      trace.push_back(rec);
      PrescriptionResult r{rel, rec.residual * std::abs(target), target, k,
                           kernel_part.size() ? kernel_part : Eigen::VectorXd::Zero(0), 0.0,
                           std::move(trace)};
      return r;
    }
    if (k >= opts.max_iter) {
      trace.push_back(rec);
      throw NonConvergence("no convergence after " + std::to_string(k) +
                               " iterations (residual " + sci(rec.residual) + ")",
                           std::move(trace));
    }

    // P v_new = target e^{4v} - Q_g, kernel part projected out.
    const Eigen::VectorXd rhs = analyze(target * e - Eigen::VectorXd::Constant(e.size(), qg), sp).coeffs();
    kernel_part.resize(0);
    std::vector<double> kp;
    for (Eigen::Index i = 0; i < rhs.size(); ++i)
      if (mask[static_cast<std::size_t>(i)]) kp.push_back(rhs[i]);
    kernel_part = Eigen::Map<Eigen::VectorXd>(kp.data(), static_cast<Eigen::Index>(kp.size()));
    rec.kernel_component = kernel_part.norm() / (std::abs(target) * c0);
    const Eigen::VectorXd v_new =
        (1 - opts.damping) * v + opts.damping * pseudo_solve(ctx, rhs, mask);
    rec.step = sup(synthesize_coeffs(s, v_new - v));
    trace.push_back(rec);
    const double vs = std::max(1.0, sup(synthesize_coeffs(s, v)));
    if (rec.step <= opts.stall_tol * vs) {
      const double tol = ctx.tolerances().functional;
      if (rec.kernel_component > tol)
        throw FredholmViolation(
            "iteration stalled with a right side not orthogonal to N(P) (relative " +
                sci(rec.kernel_component) + ")",
            kernel_part, kq, tol * std::abs(target) * c0);
      throw NonConvergence("iteration stalled at residual " + sci(rec.residual),
                           std::move(trace));
    }
    v = v_new;
  }
}

}  // namespace qcurv
