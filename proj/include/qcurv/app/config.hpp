#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "qcurv/fields.hpp"
#include "qcurv/geometry.hpp"
#include "qcurv/qfunctional.hpp"

namespace qcurv::app {

struct ScanConfig {
  int factor = 1;
  double from = 0.5;
  double to = 1.5;
  int steps = 101;
};

/// Random starting factor for the prescription commands.
struct Omega0Config {
  std::uint64_t seed = 0;
  double amplitude = 0.15;
};

struct ExperimentConfig {
  std::string source;        // path or "<string>"
  std::uint64_t source_hash = 0;
  nlohmann::ordered_json parsed;  // echoed verbatim into every report
  ProductManifold manifold{FactorSpec::sphere(1, 1), FactorSpec::sphere(1, 1)};
  std::optional<SectorKind> sector;
  std::uint64_t seed = 0;
  int samples = 20;
  Tolerances tol;
  ScanConfig scan;
  std::optional<Omega0Config> omega0;
  std::optional<double> target;

  /// The configured sector, or factor1 when a factor is abstract.
  SectorKind effective_sector() const;
};

/// Parses a JSON experiment description. Errors are ConfigError with a
/// "line L, column C" position for syntax errors and a dotted field path
/// (e.g. manifold.factor1.radius) for semantic ones.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::string& path);

}  // namespace qcurv::app
