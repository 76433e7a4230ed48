#include "qcurv/app/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qcurv/error.hpp"
#include "qcurv/hash.hpp"
#include "qcurv/io.hpp"
#include "qcurv/kernels.hpp"
#include "qcurv/paneitz.hpp"

namespace qcurv::app {

json factor_json(const FactorSpec& f) {
  json j;
  j["kind"] = to_string(f.kind());
  switch (f.kind()) {
    case FactorKind::Sphere2:
      j["radius"] = f.radius();
      j["lmax"] = f.truncation();
      break;
    case FactorKind::FlatTorus2:
      j["periods"] = {f.period1(), f.period2()};
      j["kmax"] = f.truncation();
      break;
    case FactorKind::AbstractHyperbolic2:
      j["scale"] = f.scale();
      j["genus"] = f.genus();
      j["spectrum"] = f.spectrum();
      j["modes"] = f.truncation();
      break;
  }
  j["area"] = f.area();
  j["euler_characteristic"] = f.euler_characteristic();
  j["b1"] = f.first_betti();
  return j;
}

json manifold_json(const ProductManifold& m) {
  json j;
  j["label"] = m.describe();
  j["factor1"] = factor_json(m.factor1());
  j["factor2"] = factor_json(m.factor2());
  j["volume"] = m.volume();
  j["euler_characteristic"] = m.euler_characteristic();
  j["b1"] = m.first_betti();
  return j;
}

json curvature_json(const CurvatureData& c) {
  return json{{"R1", c.R1}, {"R2", c.R2}, {"R", c.R}, {"ricci_norm_sq", c.ricci_norm_sq},
              {"volume", c.volume}};
}

json tolerances_json(const Tolerances& t) {
  return json{{"kernel", t.kernel},         {"gap_ratio", t.gap_ratio},
              {"functional", t.functional}, {"membership", t.membership},
              {"sign_margin", t.sign_margin}, {"invariance", t.invariance}};
}

json kernel_json(const KernelBasis& k) {
  json j;
  j["dim"] = k.dim;
  j["tol"] = k.tol;
  j["norm"] = k.norm;
  j["threshold"] = k.threshold;
  j["gap"] = k.gap;
  j["scope"] = k.scope;
  j["positivity_proven"] = k.proof_note.proven;
  j["proof_note"] = k.proof_note.text;
  json modes = json::array();
  for (const ScalarField& f : k.fields) {
    const Sector& s = f.sector();
    json terms = json::array();
    for (Eigen::Index i = 0; i < f.coeffs().size(); ++i)
      if (std::abs(f.coeffs()[i]) > 1e-12) {
        const Mode m = s.mode(i);
        terms.push_back({{"factor1_mode", io::mode_label(s.basis1(), m.i1)},
                         {"factor2_mode", io::mode_label(s.basis2(), m.i2)},
                         {"coefficient", f.coeffs()[i]}});
      }
    modes.push_back(terms);
  }
  j["basis"] = modes;
  return j;
}

json certificate_json(const ForbiddenCertificate& c) {
  json j;
  j["verdict"] = to_string(c.verdict);
  j["reason"] = c.reason;
  j["k_Q"] = c.k_q;
  j["membership_residual"] = c.membership_residual;
  j["f_min"] = c.f_min;
  j["f_max"] = c.f_max;
  j["sign_margin"] = c.sign_margin;
  j["witness_integral"] = c.witness_integral;
  j["witness_min_product"] = c.witness_min_product;
  j["integral_margin"] = c.integral_margin;
  j["candidates"] = c.candidates;
  j["heuristic"] = c.heuristic;
  j["has_witness"] = c.witness.has_value();
  return j;
}

json report_header(const std::string& command, const ExperimentConfig& cfg, SectorKind sector) {
  json j;
  j["command"] = command;
  j["config_source"] = cfg.source;
  j["config_hash"] = hex64(cfg.source_hash);
  j["config"] = cfg.parsed;
  j["manifold"] = manifold_json(cfg.manifold);
  j["sector"] = to_string(sector);
  j["seed"] = cfg.seed;
  j["tolerances"] = tolerances_json(cfg.tol);
  j["convention"] = json{{"text", convention_text()}, {"hash", convention_hash()}};
  return j;
}

void stamp_metadata(json& report) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  report["metadata"] = json{{"timestamp", buf}, {"threads", kernels::thread_count()}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace {
void flatten(const json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    std::string v = j.is_string() ? j.get<std::string>() : j.dump();
    if (v.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      v = q + "\"";
    }
    os << prefix << ',' << v << '\n';
  }
}
}  // namespace

std::string flatten_csv(const json& j) {
  std::ostringstream os;
  os << "key,value\n";
  flatten(j, "", os);
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) fail(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qcurv::app
