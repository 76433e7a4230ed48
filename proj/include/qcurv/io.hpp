#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "qcurv/fields.hpp"
#include "qcurv/paneitz.hpp"

namespace qcurv::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a full token; throws ConfigError on trailing garbage.
double parse_double(std::string_view text);

/// Human-readable mode label on one factor: "l:m", "k1:k2" or "n".
std::string mode_label(const FactorBasis& basis, int i);

/// index,factor1_mode,factor2_mode,coefficient
void write_field_csv(std::ostream& os, const ScalarField& f);
/// Reads a field written by write_field_csv into `sector`. Row count and mode
/// labels must match the sector.
ScalarField read_field_csv(std::istream& is, const SectorPtr& sector);

/// node,x1a,x1b,x2a,x2b,value on the quadrature grid.
void write_grid_csv(std::ostream& os, const ScalarField& f);
Eigen::VectorXd read_grid_csv(std::istream& is, const Sector& sector);

/// Dense matrix with a `# key: value` header (metric_tag, sector, truncation).
/// Background operators are written as their diagonal.
void write_operator_csv(std::ostream& os, const PaneitzOperator& p);

}  // namespace qcurv::io
