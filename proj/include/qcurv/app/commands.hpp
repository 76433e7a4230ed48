#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qcurv/fields.hpp"

namespace qcurv::app {

struct CommandOptions {
  std::string command;
  std::string manifold_path;
  std::optional<SectorKind> sector;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out_dir;  // empty: print to stdout
  std::string format = "json";
  std::string field_path;
  std::string omega0_path;
  std::optional<double> target;
};

const std::vector<std::string>& command_names();

/// Runs one command and returns the process exit code: 0 success, 2 for the
/// mathematically meaningful negatives (Fredholm violation, certified
/// obstruction). Library errors propagate as qcurv::Error (exit code 1).
int run_command(const CommandOptions& opts, std::ostream& out);

}  // namespace qcurv::app
