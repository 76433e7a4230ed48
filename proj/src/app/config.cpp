#include "qcurv/app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "qcurv/error.hpp"
#include "qcurv/hash.hpp"

namespace qcurv::app {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigError, path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      field_error(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) field_error(path + "." + key, "missing");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number, got " + std::string(v.type_name()));
  return v.get<double>();
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0)) field_error(path, "must be positive");
  return x;
}

int integer(const json& v, const std::string& path, int lo) {
  if (!v.is_number_integer()) field_error(path, "expected an integer");
  const auto x = v.get<long long>();
  if (x < lo) field_error(path, "must be >= " + std::to_string(lo));
  return static_cast<int>(x);
}

std::uint64_t seed_value(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    field_error(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

FactorSpec parse_factor(const json& f, const std::string& path) {
  if (!f.is_object()) field_error(path, "expected an object");
  const json& kind_v = require(f, path, "kind");
  if (!kind_v.is_string()) field_error(path + ".kind", "expected a string");
  FactorKind kind;
  try {
    kind = factor_kind_from_string(kind_v.get<std::string>());
  } catch (const Error& e) {
    field_error(path + ".kind", e.what());
  }
  try {
    switch (kind) {
      case FactorKind::Sphere2:
        reject_unknown(f, path, {"kind", "radius", "lmax"});
        return FactorSpec::sphere(positive(require(f, path, "radius"), path + ".radius"),
                                  integer(require(f, path, "lmax"), path + ".lmax", 0));
      case FactorKind::FlatTorus2: {
        reject_unknown(f, path, {"kind", "periods", "kmax"});
        const json& p = require(f, path, "periods");
        if (!p.is_array() || p.size() != 2) field_error(path + ".periods", "expected [L1, L2]");
        return FactorSpec::torus(positive(p[0], path + ".periods[0]"),
                                 positive(p[1], path + ".periods[1]"),
                                 integer(require(f, path, "kmax"), path + ".kmax", 0));
      }
      case FactorKind::AbstractHyperbolic2: {
        reject_unknown(f, path, {"kind", "scale", "genus", "spectrum", "modes"});
        std::vector<double> spectrum;
        if (f.contains("spectrum")) {
          const json& s = f.at("spectrum");
          if (!s.is_array()) field_error(path + ".spectrum", "expected an array");
          for (std::size_t i = 0; i < s.size(); ++i)
            spectrum.push_back(number(s[i], path + ".spectrum[" + std::to_string(i) + "]"));
        }
        const int modes = f.contains("modes") ? integer(f.at("modes"), path + ".modes", 0) : 0;
        return FactorSpec::hyperbolic(positive(require(f, path, "scale"), path + ".scale"),
                                      integer(require(f, path, "genus"), path + ".genus", 2),
                                      spectrum, modes);
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    field_error(path, e.what());
  }
  field_error(path, "unreachable");
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

SectorKind ExperimentConfig::effective_sector() const {
  if (sector) return *sector;
  return manifold.grid_backed() ? SectorKind::FullProduct : SectorKind::Factor1Only;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  cfg.source = source;
  cfg.source_hash = fnv1a(text);
  try {
    cfg.parsed = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is 1-based and points just past the offending character.
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    fail(ErrorCode::ConfigError, source + ": line " + std::to_string(line) + ", column " +
                                     std::to_string(col) + ": " +
                                     (pos == std::string::npos ? msg : msg.substr(pos)));
  }
  const json& root = cfg.parsed;
  if (!root.is_object()) field_error("<root>", "expected a JSON object");
  reject_unknown(root, "",
                 {"manifold", "sector", "seed", "samples", "tolerances", "scan", "omega0", "target"});

  const json& m = require(root, "<root>", "manifold");
  if (!m.is_object()) field_error("manifold", "expected an object");
  reject_unknown(m, "manifold", {"factor1", "factor2"});
  cfg.manifold = ProductManifold(parse_factor(require(m, "manifold", "factor1"), "manifold.factor1"),
                                 parse_factor(require(m, "manifold", "factor2"), "manifold.factor2"));

  if (root.contains("sector")) {
    const json& s = root.at("sector");
    if (!s.is_string()) field_error("sector", "expected \"full\" or \"factor1\"");
    try {
      cfg.sector = sector_kind_from_string(s.get<std::string>());
    } catch (const Error& e) {
      field_error("sector", e.what());
    }
  }
  if (root.contains("seed")) cfg.seed = seed_value(root.at("seed"), "seed");
  if (root.contains("samples")) cfg.samples = integer(root.at("samples"), "samples", 1);
  if (root.contains("target")) cfg.target = number(root.at("target"), "target");

  if (root.contains("tolerances")) {
    const json& t = root.at("tolerances");
    if (!t.is_object()) field_error("tolerances", "expected an object");
    reject_unknown(t, "tolerances",
                   {"kernel", "gap_ratio", "functional", "membership", "sign_margin", "invariance"});
    auto opt = [&](const char* key, double& dst) {
      if (t.contains(key)) dst = positive(t.at(key), std::string("tolerances.") + key);
    };
    opt("kernel", cfg.tol.kernel);
    opt("gap_ratio", cfg.tol.gap_ratio);
    opt("functional", cfg.tol.functional);
    opt("membership", cfg.tol.membership);
    opt("sign_margin", cfg.tol.sign_margin);
    opt("invariance", cfg.tol.invariance);
  }

  if (root.contains("scan")) {
    const json& s = root.at("scan");
    if (!s.is_object()) field_error("scan", "expected an object");
    reject_unknown(s, "scan", {"factor", "from", "to", "steps"});
    if (s.contains("factor")) {
      cfg.scan.factor = integer(s.at("factor"), "scan.factor", 1);
      if (cfg.scan.factor > 2) field_error("scan.factor", "must be 1 or 2");
    }
    if (s.contains("from")) cfg.scan.from = positive(s.at("from"), "scan.from");
    if (s.contains("to")) cfg.scan.to = positive(s.at("to"), "scan.to");
    if (s.contains("steps")) cfg.scan.steps = integer(s.at("steps"), "scan.steps", 1);
  }

  if (root.contains("omega0")) {
    const json& o = root.at("omega0");
    if (!o.is_object()) field_error("omega0", "expected an object");
    reject_unknown(o, "omega0", {"seed", "amplitude"});
    Omega0Config oc;
    if (o.contains("seed")) oc.seed = seed_value(o.at("seed"), "omega0.seed");
    if (o.contains("amplitude")) oc.amplitude = positive(o.at("amplitude"), "omega0.amplitude");
    cfg.omega0 = oc;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace qcurv::app
