#include "qcurv/qfunctional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "qcurv/error.hpp"
#include "qcurv/kernels.hpp"

namespace qcurv {

namespace {

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Values of f on nodes followed by check points.
Eigen::VectorXd stacked_values(const ScalarField& f) {
  const PointValues p = point_values(f);
  Eigen::VectorXd out(p.nodal.size() + p.check.size());
  out << p.nodal, p.check;
  return out;
}

ScalarField combination(const std::vector<ScalarField>& basis, const Eigen::VectorXd& c) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(basis.front().coeffs().size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    coeffs += c[static_cast<Eigen::Index>(k)] * basis[k].coeffs();
  return ScalarField(basis.front().sector_ptr(), std::move(coeffs));
}

// Node/check-point table of a field list (rows: points, cols: fields).
Eigen::MatrixXd value_table(const std::vector<ScalarField>& fields) {
  const Eigen::VectorXd first = stacked_values(fields.front());
  Eigen::MatrixXd t(first.size(), static_cast<Eigen::Index>(fields.size()));
  t.col(0) = first;
  for (std::size_t k = 1; k < fields.size(); ++k)
    t.col(static_cast<Eigen::Index>(k)) = stacked_values(fields[k]);
  return t;
}

void grid_rec(int k, double r, double step, std::vector<double>& prefix,
              std::vector<Eigen::VectorXd>& out) {
  auto emit = [&](std::initializer_list<double> tail) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(prefix.size() + tail.size()));
    Eigen::Index i = 0;
    for (double x : prefix) v[i++] = x;
    for (double x : tail) v[i++] = x;
    out.push_back(v);
  };
  if (k == 1) {
    emit({r});
    if (r > 1e-12) emit({-r});
    return;
  }
  if (k == 2) {
    const int n = std::max(1, static_cast<int>(std::ceil(2 * std::numbers::pi * r / step)));
    for (int j = 0; j < n; ++j) {
      const double phi = 2 * std::numbers::pi * j / n;
      emit({r * std::cos(phi), r * std::sin(phi)});
    }
    return;
  }
  const int n = std::max(1, static_cast<int>(std::ceil(std::numbers::pi * r / step)));
  for (int j = 0; j <= n; ++j) {
    const double theta = std::numbers::pi * j / n;
    prefix.push_back(r * std::cos(theta));
    grid_rec(k - 1, r * std::sin(theta), step, prefix, out);
    prefix.pop_back();
  }
}

bool kq_is_zero(const QContext& ctx) {
  const ScalarField one = ScalarField::constant(ctx.sector_ptr(), 1.0);
  return std::abs(ctx.k_q()) <= ctx.tolerances().functional * ctx.q_scale(one);
}

}  // namespace

// ---------------------------------------------------------------------------
// QContext

QContext::QContext(SectorPtr sector, const Tolerances& tol, std::optional<ConformalFactor> omega,
                   QField q, PaneitzOperator p0, PaneitzOperator p, KernelBasis kernel,
                   double parent_ref)
    : sector_(std::move(sector)),
      tol_(tol),
      omega_(std::move(omega)),
      q_(std::move(q)),
      measure_(omega_ ? conformal_measure(*omega_) : background_measure(sector_)),
      p0_(std::move(p0)),
      p_(std::move(p)),
      kernel_(std::move(kernel)) {
  volume_ = integral(ScalarField::constant(sector_, 1.0), measure_);
  k_q_ = integral(q_.q, measure_);
  if (sector_->grid_backed()) {
    const PointValues pv = point_values(q_.q);
    q_sup_ = std::max(sup(pv.nodal), sup(pv.check));
  } else {
    q_sup_ = std::abs(q_background_value(sector_->manifold()));
  }
  q_ref_ = std::max(q_sup_, parent_ref);
}

QContext QContext::make(const SectorPtr& sector, std::optional<ConformalFactor> omega,
                        const Tolerances& tol) {
  PaneitzOperator p0 = assemble_background(sector);
  KernelBasis kernel = kernel_basis(p0, tol.kernel, tol.gap_ratio);
  if (omega && omega->is_zero()) omega.reset();
  if (!omega) {
    PaneitzOperator p = p0;
    return QContext(sector, tol, std::nullopt, q_background(sector), std::move(p0), std::move(p),
                    std::move(kernel), 0.0);
  }
  require_same_sector(*sector, omega->sector(), "QContext");
  QField q = q_transform(q_background(sector), *omega, p0);
  PaneitzOperator p = conformal_paneitz(p0, *omega, Materialize::MatrixFree);
  return QContext(sector, tol, std::move(omega), std::move(q), std::move(p0), std::move(p),
                  std::move(kernel), 0.0);
}

QContext QContext::rescaled(const ConformalFactor& omega) const {
  require_same_sector(*sector_, omega.sector(), "QContext::rescaled");
  const ConformalFactor total =
      omega_ ? compose(*omega_, omega, kNoAliasingLimit) : omega;
  if (total.is_zero())
    return QContext(sector_, tol_, std::nullopt, q_background(sector_), p0_, p0_, kernel_, q_ref_);
  QField q = q_transform(q_background(sector_), total, p0_);
  PaneitzOperator p = conformal_paneitz(p0_, total, Materialize::MatrixFree);
  return QContext(sector_, tol_, total, std::move(q), p0_, std::move(p), kernel_, q_ref_);
}

double QContext::q_scale(const ScalarField& u) const {
  return q_ref_ * l2_norm(u, measure_) * std::sqrt(volume_);
}

// ---------------------------------------------------------------------------
// Functional

double kernel_residual(const QContext& ctx, const ScalarField& u) {
  require_same_sector(ctx.sector(), u.sector(), "kernel_residual");
  const Eigen::VectorXd& lambda = ctx.background_operator().symbol();
  const double un = u.coeffs().norm();
  const double pn = lambda.cwiseAbs().maxCoeff();
  if (un == 0 || pn == 0) return 0;
  return lambda.cwiseProduct(u.coeffs()).norm() / (pn * un);
}

double q_pairing(const QContext& ctx, const ScalarField& f) {
  return inner_product(f, ctx.q().q, ctx.measure());
}

double q_functional(const QContext& ctx, const ScalarField& u) {
  const double r = kernel_residual(ctx, u);
  if (r > ctx.tolerances().kernel)
    fail(ErrorCode::NotInKernel, "||P u|| / (||P|| ||u||) = " + sci(r) +
                                     " exceeds the kernel tolerance; Q(u) is not conformally "
                                     "invariant for this u");
  return q_pairing(ctx, u);
}

NQBasis nq_basis(const QContext& ctx) {
  const KernelBasis& kb = ctx.kernel();
  NQBasis out;
  const Eigen::Index d = kb.dim;
  out.functional_on_kernel.resize(d);
  double scale = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    out.functional_on_kernel[j] = q_functional(ctx, kb.fields[static_cast<std::size_t>(j)]);
    scale = std::max(scale, ctx.q_scale(kb.fields[static_cast<std::size_t>(j)]));
  }
  out.tolerance = ctx.tolerances().functional * scale;
  const Eigen::VectorXd& a = out.functional_on_kernel;
  if (a.norm() <= out.tolerance) {
    out.fields = kb.fields;
    out.codim_in_np = 0;
    return out;
  }
  out.codim_in_np = 1;
  // Complement of a in R^d: eliminate the dominant coordinate, then
  // Gram-Schmidt, which keeps basis vectors with a_k = 0 untouched.
  Eigen::Index jstar = 0;
  a.cwiseAbs().maxCoeff(&jstar);
  std::vector<Eigen::VectorXd> vs;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (k == jstar) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Unit(d, k);
    v[jstar] = -a[k] / a[jstar];
    for (const auto& w : vs) v -= w.dot(v) * w;
    v.normalize();
    vs.push_back(v);
  }
  for (const auto& v : vs) out.fields.push_back(combination(kb.fields, v));
  return out;
}

Decomposition decompose(const QContext& ctx, const ScalarField& u) {
  const double qu = q_functional(ctx, u);
  if (kq_is_zero(ctx))
    fail(ErrorCode::KQZero, "k_Q = " + sci(ctx.k_q()) +
                                " vanishes within tolerance; N(P) does not split as N(d) + N(Q)");
  Decomposition d{qu / ctx.k_q(), u, qu, ctx.k_q(), 0};
  d.u1 = u - ScalarField::constant(u.sector_ptr(), d.u0);
  const double s = ctx.q_scale(d.u1);
  d.u1_residual = s > 0 ? std::abs(q_pairing(ctx, d.u1)) / s : 0.0;
  return d;
}

HodgeComparison hodge_compare(const QContext& ctx, const ScalarField& u) {
  if (ctx.q().q.has_point_values()) {
    const PointValues pv = point_values(ctx.q().q);
    const double mean = pv.nodal.mean();
    const double var = std::max((pv.nodal.array() - mean).abs().maxCoeff(),
                                (pv.check.array() - mean).abs().maxCoeff());
    if (var > ctx.tolerances().invariance * ctx.q_sup())
      fail(ErrorCode::NotConstantQ, "Q varies by " + sci(var) +
                                        " over the grid; the Hodge comparison needs constant Q");
  }
  const Decomposition d = decompose(ctx, u);
  HodgeComparison h;
  h.u0 = d.u0;
  h.mean = integral(u, ctx.measure()) / ctx.volume();
  const double un = l2_norm(u, ctx.measure());
  h.difference = un > 0 ? std::abs(h.u0 - h.mean) * std::sqrt(ctx.volume()) / un : 0.0;
  h.agree = h.difference <= ctx.tolerances().invariance;
  return h;
}

// ---------------------------------------------------------------------------
// Certificates

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::InNullQ: return "InNullQ";
    case Verdict::SignVsKQ: return "SignVsKQ";
    case Verdict::FCertificate: return "FCertificate";
    case Verdict::NoCertificate: return "NoCertificate";
  }
  return "?";
}

namespace {

struct WitnessTest {
  bool pass = false;
  double integral = 0;
  double min_product = 0;
  double margin = 0;
};

WitnessTest test_witness(const QContext& ctx, const ScalarField& f, const Eigen::VectorXd& fv,
                         const ScalarField& u, const Eigen::VectorXd& uv) {
  WitnessTest t;
  const Eigen::VectorXd prod = fv.cwiseProduct(uv);
  const double scale = sup(fv) * sup(uv);
  const double m = ctx.tolerances().sign_margin;
  t.min_product = prod.minCoeff();
  t.integral = inner_product(f, u, ctx.measure());
  t.margin = m * scale * ctx.volume();
  t.pass = scale > 0 && t.min_product >= -m * scale && t.integral > t.margin;
  return t;
}

}  // namespace

ForbiddenCertificate f_certificate(const QContext& ctx, const ScalarField& f, const ScalarField& u) {
  require_grid(ctx.sector(), "f_certificate");
  ForbiddenCertificate c;
  c.k_q = ctx.k_q();
  const double uq = ctx.q_scale(u);
  if (kernel_residual(ctx, u) > ctx.tolerances().kernel ||
      std::abs(q_pairing(ctx, u)) > ctx.tolerances().functional * uq) {
    c.reason = "witness is not in N(Q)";
    return c;
  }
  const WitnessTest t = test_witness(ctx, f, stacked_values(f), u, stacked_values(u));
  c.candidates = 1;
  c.witness_integral = t.integral;
  c.witness_min_product = t.min_product;
  c.integral_margin = t.margin;
  if (t.pass) {
    c.verdict = Verdict::FCertificate;
    c.witness = u;
    c.reason = "f u >= 0 pointwise with positive integral for u in N(Q): f in F";
  } else {
    c.reason = "f u changes sign or integrates to zero";
  }
  return c;
}

ForbiddenCertificate forbidden_certificate(const QContext& ctx, const ScalarField& f) {
  require_same_sector(ctx.sector(), f.sector(), "forbidden_certificate");
  const Tolerances& tol = ctx.tolerances();
  ForbiddenCertificate c;
  c.k_q = ctx.k_q();
  const double fn = f.coeffs().norm();
  if (fn == 0) {
    c.reason = "f is identically zero";
    return c;
  }
  const NQBasis nq = nq_basis(ctx);

  // (i) membership in N(Q)
  Eigen::VectorXd resid = f.coeffs();
  for (const ScalarField& n : nq.fields) resid -= n.coeffs().dot(f.coeffs()) * n.coeffs();
  c.membership_residual = std::max(resid.norm() / fn, f.aliasing());
  if (!nq.fields.empty() && c.membership_residual <= tol.membership) {
    c.verdict = Verdict::InNullQ;
    c.reason = "f is a nonzero element of N(Q): no metric has Q = alpha f, alpha != 0";
    return c;
  }
  if (!ctx.sector().grid_backed()) {
    c.reason = "sector has no grid; pointwise certificates unavailable";
    return c;
  }

  // (ii) single sign against k_Q
  const Eigen::VectorXd fv = stacked_values(f);
  c.f_min = fv.minCoeff();
  c.f_max = fv.maxCoeff();
  c.sign_margin = tol.sign_margin * sup(fv);
  const bool e_plus = c.f_min >= -c.sign_margin && c.f_max > c.sign_margin;
  const bool e_minus = c.f_max <= c.sign_margin && c.f_min < -c.sign_margin;
  const bool kq0 = kq_is_zero(ctx);
  if ((kq0 && (e_plus || e_minus)) || (!kq0 && c.k_q < 0 && e_plus) ||
      (!kq0 && c.k_q > 0 && e_minus)) {
    c.verdict = Verdict::SignVsKQ;
    c.reason = kq0 ? "k_Q = 0 and f is single-signed"
                   : "f is single-signed opposite to k_Q: f is not Q of any metric in the class";
    return c;
  }

  // (iii) witness search over N(Q)
  const int d = static_cast<int>(nq.fields.size());
  if (d == 0) {
    c.reason = "N(Q) = {0}; no witness available";
    return c;
  }
  const Eigen::MatrixXd table = value_table(nq.fields);
  std::vector<Eigen::VectorXd> cands;
  for (int k = 0; k < d; ++k) {
    cands.push_back(Eigen::VectorXd::Unit(d, k));
    cands.push_back(-Eigen::VectorXd::Unit(d, k));
  }
  if (d >= 2) {
    c.heuristic = true;
    for (auto& v : unit_sphere_grid(d, 5.0 * std::numbers::pi / 180)) cands.push_back(v);
  }
  c.candidates = static_cast<int>(cands.size());
  // Screen all candidates in parallel on point values; confirm the first
  // passing one (in candidate order) with the full test.
  std::vector<char> screen(cands.size(), 0);
  const double m = tol.sign_margin;
  const double fs = sup(fv);
  kernels::parallel_for(static_cast<Eigen::Index>(cands.size()), [&](Eigen::Index i) {
    const Eigen::VectorXd uv = table * cands[static_cast<std::size_t>(i)];
    const Eigen::VectorXd prod = fv.cwiseProduct(uv);
    const double scale = fs * sup(uv);
    screen[static_cast<std::size_t>(i)] = scale > 0 && prod.minCoeff() >= -m * scale;
  });
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!screen[i]) continue;
    const ScalarField u = combination(nq.fields, cands[i]);
    const WitnessTest t = test_witness(ctx, f, fv, u, table * cands[i]);
    if (!t.pass) continue;
    c.verdict = Verdict::FCertificate;
    c.witness = u;
    c.witness_integral = t.integral;
    c.witness_min_product = t.min_product;
    c.integral_margin = t.margin;
    c.reason = "f u >= 0 pointwise with positive integral for u in N(Q): f in F";
    return c;
  }
  c.reason = "no certificate found; this is not a claim that f is attainable";
  return c;
}

ForbiddenFamily forbidden_family(const QContext& ctx, const ScalarField& u,
                                 const std::vector<int>& exponents, double rank_tol) {
  const Eigen::VectorXd& cu = u.coeffs();
  if (cu.tail(cu.size() - 1).norm() <= 1e-12 * cu.norm())
    fail(ErrorCode::ConstantInput, "u is constant; its powers span a single line");
  ForbiddenFamily fam;
  fam.exponents = exponents;
  for (int p : exponents) {
    if (p < 1 || p % 2 == 0)
      fail(ErrorCode::InvalidArgument, "exponents must be odd positive integers");
    ScalarField up = p == 1 ? u : pointwise_map(u, [p](double x) { return std::pow(x, p); });
    fam.certificates.push_back(f_certificate(ctx, up, u));
    fam.fields.push_back(std::move(up));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(fam.fields.size());
  std::vector<double> norms;
  for (const auto& f : fam.fields) norms.push_back(l2_norm(f, ctx.measure()));
  fam.gram.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
      fam.gram(i, j) = fam.gram(j, i) =
          inner_product(fam.fields[si], fam.fields[sj], ctx.measure()) / (norms[si] * norms[sj]);
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fam.gram);
  fam.singular_values = svd.singularValues();
  const double smax = n ? fam.singular_values[0] : 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (fam.singular_values[i] > rank_tol * smax) ++fam.rank;
  return fam;
}

// ---------------------------------------------------------------------------
// Obstruction, cap, harmonic report

std::vector<Eigen::VectorXd> unit_sphere_grid(int d, double step) {
  if (d < 1 || !(step > 0)) fail(ErrorCode::InvalidArgument, "unit_sphere_grid: bad arguments");
  std::vector<Eigen::VectorXd> out;
  std::vector<double> prefix;
  grid_rec(d, 1.0, step, prefix, out);
  return out;
}

ObstructionResult constant_q_obstruction(const QContext& ctx,
                                         const std::optional<NQBasis>& injected,
                                         double step_degrees) {
  ObstructionResult r;
  const Tolerances& tol = ctx.tolerances();
  if (!injected && kq_is_zero(ctx)) {
    // Constant Q would have to be 0; Q-flat metrics exist iff the Fredholm
    // integrals vanish.
    r.method = "fredholm";
    const KernelBasis& kb = ctx.kernel();
    r.dim_nq = kb.dim;
    double worst = 0;
    for (const ScalarField& u : kb.fields) {
      const double v = std::abs(q_functional(ctx, u));
      if (v > tol.functional * ctx.q_scale(u) && v > worst) {
        worst = v;
        r.witness = u;
      }
    }
    r.obstructed = r.witness.has_value();
    return r;
  }
  const NQBasis nq = injected ? *injected : nq_basis(ctx);
  const int d = static_cast<int>(nq.fields.size());
  r.dim_nq = d;
  if (d == 0) {
    r.method = "empty";
    return r;
  }
  require_grid(ctx.sector(), "constant_q_obstruction");
  const Eigen::MatrixXd table = value_table(nq.fields);
  auto score = [&](const Eigen::VectorXd& c) {
    const Eigen::VectorXd v = table * c;
    const double s = sup(v);
    return s > 0 ? v.minCoeff() / s : -1.0;
  };
  Eigen::VectorXd best;
  if (d == 1) {
    r.method = "sign-test";
    const Eigen::VectorXd plus = Eigen::VectorXd::Ones(1), minus = -plus;
    const double sp = score(plus), sm = score(minus);
    best = sp >= sm ? plus : minus;
    r.best_min = std::max(sp, sm);
    r.candidates = 2;
  } else {
    r.method = "sphere-grid";
    r.heuristic = true;
    const auto cands = unit_sphere_grid(d, step_degrees * std::numbers::pi / 180);
    r.candidates = static_cast<int>(cands.size());
    std::vector<double> scores(cands.size());
    kernels::parallel_for(static_cast<Eigen::Index>(cands.size()), [&](Eigen::Index i) {
      scores[static_cast<std::size_t>(i)] = score(cands[static_cast<std::size_t>(i)]);
    });
    const auto it = std::max_element(scores.begin(), scores.end());
    best = cands[static_cast<std::size_t>(it - scores.begin())];
    r.best_min = *it;
    // Pattern search on the pointwise minimum from the best grid point.
    double delta = step_degrees * std::numbers::pi / 180;
    for (int iter = 0; iter < 10000 && delta > 1e-9; ++iter) {
      bool improved = false;
      for (int k = 0; k < d && !improved; ++k)
        for (double sgn : {1.0, -1.0}) {
          Eigen::VectorXd trial = best + sgn * delta * Eigen::VectorXd::Unit(d, k);
          trial.normalize();
          const double s = score(trial);
          if (s > r.best_min) {
            best = trial;
            r.best_min = s;
            improved = true;
            break;
          }
        }
      if (!improved) delta /= 2;
    }
  }
  if (r.best_min >= -tol.sign_margin) {
    // Re-verify the witness from its own point values.
    const ScalarField w = combination(nq.fields, best);
    const Eigen::VectorXd wv = stacked_values(w);
    if (wv.minCoeff() >= -tol.sign_margin * sup(wv) && sup(wv) > 0) {
      r.obstructed = true;
      r.witness = w;
    }
  }
  return r;
}

CapReport verify_cap(const QContext& ctx, const ScalarField& f,
                     const std::vector<ConformalFactor>& omegas) {
  CapReport rep;
  rep.scale = ctx.q_scale(f);
  rep.values.assign(omegas.size(), 0.0);
  kernels::parallel_for(static_cast<Eigen::Index>(omegas.size()), [&](Eigen::Index i) {
    const auto k = static_cast<std::size_t>(i);
    rep.values[k] = q_pairing(ctx.rescaled(omegas[k]), f);
  });
  for (double v : rep.values) rep.max_residual = std::max(rep.max_residual, std::abs(v));
  return rep;
}

HarmonicReport harmonic_report(const QContext& ctx) {
  HarmonicReport h;
  h.dim_np = ctx.kernel().dim;
  h.dim_dnp = h.dim_np - 1;
  h.b1 = ctx.manifold().first_betti();
  h.strong_0_regular = h.dim_np == 1;
  h.injection_dimensions_consistent = h.dim_dnp <= h.b1;
  h.scope = ctx.kernel().scope;
  h.proof_note = ctx.kernel().proof_note.text;
  return h;
}

}  // namespace qcurv
