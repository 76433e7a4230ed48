#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qcurv/app/config.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/qfunctional.hpp"

namespace qcurv::app {

using json = nlohmann::ordered_json;

json factor_json(const FactorSpec& f);
json manifold_json(const ProductManifold& m);
json curvature_json(const CurvatureData& c);
json tolerances_json(const Tolerances& t);
json kernel_json(const KernelBasis& k);
json certificate_json(const ForbiddenCertificate& c);

/// Report fields shared by every command: command name, config echo,
/// resolved sector/seed/tolerances and the convention hash.
json report_header(const std::string& command, const ExperimentConfig& cfg, SectorKind sector);

/// Adds the non-deterministic "metadata" key (timestamp, thread count).
void stamp_metadata(json& report);

std::string dump(const json& j);
/// "key,value" rows for every scalar leaf, keys joined with '.'.
std::string flatten_csv(const json& j);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace qcurv::app
