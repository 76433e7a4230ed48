#include "qcurv/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "qcurv/app/config.hpp"
#include "qcurv/app/report.hpp"
#include "qcurv/error.hpp"
#include "qcurv/io.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/paneitz.hpp"
#include "qcurv/prescribe.hpp"
#include "qcurv/qfunctional.hpp"

namespace qcurv::app {

namespace {

struct Output {
  json report;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  std::string primary_csv;
  int exit_code = 0;
};

struct Setup {
  ExperimentConfig cfg;
  SectorKind sector_kind;
  SectorPtr sector;
};

Setup setup(const CommandOptions& o) {
  if (o.manifold_path.empty()) fail(ErrorCode::ConfigError, "--manifold is required");
  Setup s{load_config(o.manifold_path), SectorKind::FullProduct, nullptr};
  if (o.sector) s.cfg.sector = o.sector;
  if (o.seed) s.cfg.seed = *o.seed;
  if (o.tol) s.cfg.tol.kernel = *o.tol;
  if (o.target) s.cfg.target = o.target;
  s.sector_kind = s.cfg.effective_sector();
  s.sector = Sector::make(s.cfg.manifold, s.sector_kind);
  return s;
}

std::string field_csv(const ScalarField& f) {
  std::ostringstream os;
  io::write_field_csv(os, f);
  return os.str();
}

ScalarField read_field(const std::string& path, const SectorPtr& sector) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, path + ": cannot open");
  try {
    return io::read_field_csv(in, sector);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

ConformalFactor random_factor(const SectorPtr& s, std::uint64_t seed, double amplitude) {
  BandlimitOptions b;
  b.amplitude = amplitude;
  return ConformalFactor(random_bandlimited(s, seed, b));
}

// Starting factor for the prescription commands: --omega0 CSV, config
// "omega0" block, or none.
std::optional<ConformalFactor> start_factor(const CommandOptions& o, const Setup& s, json& rep) {
  if (!o.omega0_path.empty()) {
    rep["omega0"] = json{{"source", o.omega0_path}};
    return ConformalFactor(read_field(o.omega0_path, s.sector));
  }
  if (s.cfg.omega0) {
    rep["omega0"] = json{{"seed", s.cfg.omega0->seed}, {"amplitude", s.cfg.omega0->amplitude}};
    return random_factor(s.sector, s.cfg.omega0->seed, s.cfg.omega0->amplitude);
  }
  rep["omega0"] = nullptr;
  return std::nullopt;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// ---------------------------------------------------------------------------

Output cmd_describe(const CommandOptions&, const Setup& s) {
  Output out;
  out.report = report_header("describe", s.cfg, s.sector_kind);
  const QContext ctx = QContext::make(s.sector, std::nullopt, s.cfg.tol);
  const CurvatureData c = curvature_scalars(s.cfg.manifold);
  const SymbolCoefficients sc = symbol_coefficients(c);
  const NQBasis nq = nq_basis(ctx);
  json& r = out.report;
  r["curvature"] = curvature_json(c);
  r["symbol"] = json{{"c1", sc.c1}, {"c2", sc.c2}};
  r["Q"] = q_background_value(s.cfg.manifold);
  r["k_Q"] = ctx.k_q();
  r["kernel"] = kernel_json(ctx.kernel());
  r["N_Q"] = json{{"dim", static_cast<int>(nq.fields.size())},
                  {"codim_in_N_P", nq.codim_in_np},
                  {"equals_N_P", nq.codim_in_np == 0},
                  {"functional_on_kernel", vec_json(nq.functional_on_kernel)},
                  {"tolerance", nq.tolerance}};
  r["modes"] = s.sector->size();
  r["grid_backed"] = s.sector->grid_backed();
  return out;
}

Output cmd_scan(const CommandOptions&, const Setup& s) {
  Output out;
  out.report = report_header("scan-kernel", s.cfg, s.sector_kind);
  const ScanConfig& sc = s.cfg.scan;
  const ScanResult res = scan_parameter({s.cfg.manifold, sc.factor, s.sector_kind}, sc.from, sc.to,
                                        sc.steps, s.cfg.tol.kernel, s.cfg.tol.gap_ratio);
  std::ostringstream csv;
  csv << "param,dim,min_abs_lambda\n";
  json uncertified = json::array();
  std::map<int, int> dims;
  for (const ScanStep& st : res.steps) {
    csv << io::format_double(st.param) << ',' << st.dim << ','
        << io::format_double(st.min_abs_lambda) << '\n';
    if (!st.certified) uncertified.push_back(st.param);
    ++dims[st.dim];
  }
  json brackets = json::array();
  for (const ScanBracket& b : res.brackets)
    brackets.push_back(json{{"lo", b.lo}, {"hi", b.hi}, {"dim_lo", b.dim_lo}, {"dim_hi", b.dim_hi},
                            {"kind", b.kind}});
  json hist = json::object();
  for (auto [d, n] : dims) hist[std::to_string(d)] = n;
  json& r = out.report;
  r["scan"] = json{{"factor", sc.factor}, {"from", sc.from}, {"to", sc.to}, {"steps", sc.steps}};
  r["brackets"] = brackets;
  r["dim_histogram"] = hist;
  r["uncertified_params"] = uncertified;
  out.primary_csv = csv.str();
  out.files.emplace_back("scan.csv", csv.str());
  return out;
}

Output cmd_invariance(const CommandOptions&, const Setup& s) {
  require_grid(*s.sector, "invariance-suite");
  Output out;
  out.report = report_header("invariance-suite", s.cfg, s.sector_kind);
  const Tolerances& tol = s.cfg.tol;
  const QContext ctx = QContext::make(s.sector, std::nullopt, tol);
  const int n = s.cfg.samples;
  std::vector<ConformalFactor> omegas;
  for (int i = 0; i < n; ++i)
    omegas.push_back(random_factor(s.sector, s.cfg.seed + static_cast<std::uint64_t>(i), 0.15));

  const ScalarField one = ScalarField::constant(s.sector, 1.0);
  const bool kq0 = std::abs(ctx.k_q()) <= tol.functional * ctx.q_scale(one);
  const KernelBasis& kb = ctx.kernel();
  std::vector<double> kq(n), kq_drift(n), qu_drift(n), alias(n);
  kernels::parallel_for(n, [&](Eigen::Index i) {
    const auto k = static_cast<std::size_t>(i);
    const QContext c = ctx.rescaled(omegas[k]);
    kq[k] = c.k_q();
    const double denom = kq0 ? c.q_scale(one) : std::abs(ctx.k_q());
    kq_drift[k] = denom > 0 ? std::abs(c.k_q() - ctx.k_q()) / denom : 0.0;
    double worst = 0;
    for (const ScalarField& u : kb.fields) {
      const double sc = c.q_scale(u);
      const double d = std::abs(q_functional(c, u) - q_functional(ctx, u));
      worst = std::max(worst, sc > 0 ? d / sc : 0.0);
    }
    qu_drift[k] = worst;
    alias[k] = omegas[k].aliasing();
  });

  json stability;
  if (s.sector->size() <= kMaxDenseModes) {
    const PaneitzOperator p0 = assemble_background(s.sector);
    double worst = 0;
    int dim = kb.dim;
    for (const ConformalFactor& w : omegas) {
      const StabilityReport sr = check_conformal_stability(kb, p0, w, tol.kernel);
      worst = std::max(worst, sr.max_residual);
      dim = sr.dim_rescaled;
    }
    stability = json{{"checked", true}, {"max_residual", worst}, {"dim_rescaled", dim}};
  } else {
    stability = json{{"checked", false},
                     {"reason", "sector exceeds the dense limit of " +
                                    std::to_string(kMaxDenseModes) + " modes"}};
  }

  auto stats = [](const std::vector<double>& v) {
    double mx = 0, mean = 0;
    for (double x : v) {
      mx = std::max(mx, x);
      mean += x;
    }
    return json{{"max", mx}, {"mean", v.empty() ? 0.0 : mean / static_cast<double>(v.size())}};
  };
  json& r = out.report;
  r["samples"] = n;
  r["k_Q"] = ctx.k_q();
  r["k_Q_samples"] = kq;
  r["k_Q_relative_drift"] = stats(kq_drift);
  r["Q_u_relative_drift"] = stats(qu_drift);
  r["omega_aliasing"] = stats(alias);
  r["kernel_dim"] = kb.dim;
  r["stability"] = stability;
  const double mk = *std::max_element(kq_drift.begin(), kq_drift.end());
  const double mq = *std::max_element(qu_drift.begin(), qu_drift.end());
  r["pass"] = mk <= tol.invariance && mq <= tol.invariance;
  return out;
}

Output cmd_check_forbidden(const CommandOptions& o, const Setup& s) {
  if (o.field_path.empty()) fail(ErrorCode::ConfigError, "check-forbidden needs --field <csv>");
  Output out;
  out.report = report_header("check-forbidden", s.cfg, s.sector_kind);
  const QContext ctx = QContext::make(s.sector, std::nullopt, s.cfg.tol);
  const ScalarField f = read_field(o.field_path, s.sector);
  const ForbiddenCertificate c = forbidden_certificate(ctx, f);
  out.report["field"] = o.field_path;
  out.report["certificate"] = certificate_json(c);
  if (c.witness) out.files.emplace_back("witness.csv", field_csv(*c.witness));
  return out;
}

Output cmd_decompose(const CommandOptions& o, const Setup& s) {
  Output out;
  out.report = report_header("decompose", s.cfg, s.sector_kind);
  json& r = out.report;
  const QContext ctx = QContext::make(s.sector, std::nullopt, s.cfg.tol);
  std::optional<ScalarField> u;
  if (!o.field_path.empty()) {
    u = read_field(o.field_path, s.sector);
    r["field"] = o.field_path;
  } else {
    // Seeded random element of N(P).
    std::mt19937_64 rng(s.cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(s.sector->size());
    for (const ScalarField& b : ctx.kernel().fields) c += normal(rng) * b.coeffs();
    u = ScalarField(s.sector, c);
    r["field"] = "random kernel element";
  }
  const Decomposition d = decompose(ctx, *u);
  r["Q_of_u"] = d.q_of_u;
  r["k_Q"] = d.k_q;
  r["u0"] = d.u0;
  r["u1_residual"] = d.u1_residual;
  try {
    const HodgeComparison h = hodge_compare(ctx, *u);
    r["hodge"] = json{{"mean", h.mean}, {"difference", h.difference}, {"agree", h.agree}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotConstantQ) throw;
    r["hodge"] = json{{"skipped", e.what()}};
  }
  json tmp;
  if (auto w = start_factor(o, s, tmp)) {
    const Decomposition dr = decompose(ctx.rescaled(*w), *u);
    r["rescaled"] = json{{"omega0", tmp["omega0"]},
                         {"u0", dr.u0},
                         {"relative_difference",
                          std::abs(dr.u0 - d.u0) / std::max(std::abs(d.u0), 1e-300)}};
  }
  out.files.emplace_back("u1.csv", field_csv(d.u1));
  return out;
}

Output cmd_harmonics(const CommandOptions&, const Setup& s) {
  Output out;
  out.report = report_header("report-harmonics", s.cfg, s.sector_kind);
  const QContext ctx = QContext::make(s.sector, std::nullopt, s.cfg.tol);
  const HarmonicReport h = harmonic_report(ctx);
  json& r = out.report;
  r["dim_N_d"] = h.dim_nd;
  r["dim_N_P"] = h.dim_np;
  r["dim_dN_P"] = h.dim_dnp;
  r["b1"] = h.b1;
  r["strong_0_regular"] = h.strong_0_regular;
  r["injection_dimensions_consistent"] = h.injection_dimensions_consistent;
  r["surjectivity"] = "not checked (dimensions only)";
  r["scope"] = h.scope;
  r["proof_note"] = h.proof_note;
  if (s.sector->grid_backed()) {
    const ObstructionResult ob = constant_q_obstruction(ctx);
    r["constant_Q"] = json{{"verdict", ob.obstructed ? "CertifiedObstructed" : "NoCertificate"},
                           {"method", ob.method},
                           {"dim_N_Q", ob.dim_nq},
                           {"best_min", ob.best_min},
                           {"candidates", ob.candidates},
                           {"heuristic", ob.heuristic}};
    if (ob.witness) out.files.emplace_back("obstruction_witness.csv", field_csv(*ob.witness));
    if (ob.obstructed) out.exit_code = 2;
  } else {
    r["constant_Q"] = json{{"verdict", "NoCertificate"}, {"method", "skipped: no grid"}};
  }
  return out;
}

Output cmd_solve(const CommandOptions& o, const Setup& s) {
  Output out;
  out.report = report_header("solve-qflat", s.cfg, s.sector_kind);
  json& r = out.report;
  const std::optional<ConformalFactor> w0 = start_factor(o, s, r);
  const QContext ctx = QContext::make(s.sector, w0, s.cfg.tol);
  r["k_Q"] = ctx.k_q();
  try {
    const PrescriptionResult res = solve_q_flat(ctx);
    r["outcome"] = "solved";
    r["residual"] = res.residual;
    r["q_sup_before"] = ctx.q_sup();
    r["fredholm"] = json{{"integrals", vec_json(res.fredholm)}, {"tolerance", res.fredholm_tolerance}};
    double orth = 0;
    const double wn = l2_norm(res.omega.omega(), ctx.measure());
    for (const ScalarField& b : ctx.kernel().fields)
      if (wn > 0)
        orth = std::max(orth, std::abs(inner_product(res.omega.omega(), b, ctx.measure())) /
                                  (wn * l2_norm(b, ctx.measure())));
    r["kernel_orthogonality"] = orth;
    const NQBasis nq = nq_basis(ctx.rescaled(res.omega));
    r["post_solve_N_Q_codim"] = nq.codim_in_np;
    out.files.emplace_back("omega.csv", field_csv(res.omega.omega()));
    out.primary_csv = field_csv(res.omega.omega());
  } catch (const FredholmViolation& e) {
    r["outcome"] = "FredholmViolation";
    r["message"] = e.what();
    r["fredholm"] = json{{"integrals", vec_json(e.integrals())},
                         {"integral_against_one", e.integral_against_one()},
                         {"tolerance", e.tolerance()}};
    out.exit_code = 2;
  }
  return out;
}

Output cmd_iterate(const CommandOptions& o, const Setup& s) {
  if (!s.cfg.target) fail(ErrorCode::ConfigError, "iterate-constq needs --target <value>");
  Output out;
  out.report = report_header("iterate-constq", s.cfg, s.sector_kind);
  json& r = out.report;
  const std::optional<ConformalFactor> w0 = start_factor(o, s, r);
  const QContext ctx = QContext::make(s.sector, w0, s.cfg.tol);
  r["k_Q"] = ctx.k_q();
  r["target"] = *s.cfg.target;
  ConstantQOptions opts;
  auto trace_csv = [](const std::vector<IterationRecord>& t) {
    std::ostringstream os;
    os << "iteration,residual,step,kernel_component\n";
    for (const auto& rec : t)
      os << rec.iteration << ',' << io::format_double(rec.residual) << ','
         << io::format_double(rec.step) << ',' << io::format_double(rec.kernel_component) << '\n';
    return os.str();
  };
  r["damping"] = opts.damping;
  r["max_iter"] = opts.max_iter;
  try {
    const PrescriptionResult res = iterate_constant_q(ctx, *s.cfg.target, opts);
    r["outcome"] = "converged";
    r["iterations"] = res.iterations;
    r["residual"] = res.residual;
    out.primary_csv = trace_csv(res.trace);
    out.files.emplace_back("trace.csv", out.primary_csv);
    out.files.emplace_back("omega.csv", field_csv(res.omega.omega()));
  } catch (const NonConvergence& e) {
    r["outcome"] = "NonConvergence";
    r["message"] = e.what();
    out.primary_csv = trace_csv(e.trace());
    out.files.emplace_back("trace.csv", out.primary_csv);
    out.exit_code = 1;
  } catch (const FredholmViolation& e) {
    r["outcome"] = "FredholmViolation";
    r["message"] = e.what();
    r["fredholm"] = json{{"integrals", vec_json(e.integrals())},
                         {"integral_against_one", e.integral_against_one()},
                         {"tolerance", e.tolerance()}};
    out.exit_code = 2;
  }
  return out;
}

using Handler = Output (*)(const CommandOptions&, const Setup&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h = {
      {"describe", cmd_describe},
      {"scan-kernel", cmd_scan},
      {"invariance-suite", cmd_invariance},
      {"check-forbidden", cmd_check_forbidden},
      {"decompose", cmd_decompose},
      {"report-harmonics", cmd_harmonics},
      {"solve-qflat", cmd_solve},
      {"iterate-constq", cmd_iterate},
  };
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, h] : handlers()) n.push_back(name);
    return n;
  }();
  return names;
}

int run_command(const CommandOptions& o, std::ostream& out) {
  Handler h = nullptr;
  for (const auto& [name, fn] : handlers())
    if (name == o.command) h = fn;
  if (!h) fail(ErrorCode::InvalidArgument, "unknown command '" + o.command + "'");
  if (o.format != "json" && o.format != "csv")
    fail(ErrorCode::InvalidArgument, "--format must be json or csv");

  const Setup s = setup(o);
  Output res = h(o, s);
  res.report["exit_code"] = res.exit_code;
  stamp_metadata(res.report);

  if (!o.out_dir.empty()) {
    const std::filesystem::path dir(o.out_dir);
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : res.files) write_file_atomic(dir / name, content);
    write_file_atomic(dir / "report.json", dump(res.report));
    if (o.format == "csv") write_file_atomic(dir / "report.csv", flatten_csv(res.report));
    out << (dir / "report.json").string() << '\n';
  } else if (o.format == "csv") {
    out << (res.primary_csv.empty() ? flatten_csv(res.report) : res.primary_csv);
  } else {
    out << dump(res.report);
  }
  return res.exit_code;
}

}  // namespace qcurv::app
