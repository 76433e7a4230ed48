#include "qcurv/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "qcurv/error.hpp"

namespace qcurv::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool next_data_line(std::istream& is, std::string& line, int& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

long parse_index(const std::string& s, int lineno) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": bad index '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view text) {
  double v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    fail(ErrorCode::ConfigError, "not a number: '" + std::string(text) + "'");
  return v;
}

std::string mode_label(const FactorBasis& basis, int i) {
  const auto l = basis.label(i);
  return std::to_string(l[0]) + ":" + std::to_string(l[1]);
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
  const Sector& s = f.sector();
  os << "index,factor1_mode,factor2_mode,coefficient\n";
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const Mode m = s.mode(i);
    os << i << ',' << mode_label(s.basis1(), m.i1) << ',' << mode_label(s.basis2(), m.i2) << ','
       << format_double(f.coeffs()[i]) << '\n';
  }
}

ScalarField read_field_csv(std::istream& is, const SectorPtr& sector) {
  const Sector& s = *sector;
  std::string line;
  int lineno = 0;
  if (!next_data_line(is, line, lineno) || line != "index,factor1_mode,factor2_mode,coefficient")
    fail(ErrorCode::ConfigError, "field CSV: missing header index,factor1_mode,factor2_mode,coefficient");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.size());
  std::vector<bool> seen(static_cast<std::size_t>(s.size()), false);
  while (next_data_line(is, line, lineno)) {
    const auto cols = split(line, ',');
    if (cols.size() != 4)
      fail(ErrorCode::ConfigError, "field CSV line " + std::to_string(lineno) + ": expected 4 columns");
    const long i = parse_index(cols[0], lineno);
    if (i < 0 || i >= s.size())
      fail(ErrorCode::SectorMismatch,
           "field CSV line " + std::to_string(lineno) + ": mode index outside the sector");
    const Mode m = s.mode(i);
    if (cols[1] != mode_label(s.basis1(), m.i1) || cols[2] != mode_label(s.basis2(), m.i2))
      fail(ErrorCode::SectorMismatch, "field CSV line " + std::to_string(lineno) +
                                          ": mode labels do not match the sector ordering");
    c[i] = parse_double(cols[3]);
    seen[static_cast<std::size_t>(i)] = true;
  }
  for (bool b : seen)
    if (!b)
      fail(ErrorCode::SectorMismatch, "field CSV does not cover every mode of the sector (" +
                                          std::to_string(s.size()) + " expected)");
  return ScalarField(sector, std::move(c));
}

void write_grid_csv(std::ostream& os, const ScalarField& f) {
  const Sector& s = f.sector();
  require_grid(s, "write_grid_csv");
  const Eigen::VectorXd v = synthesize(f);
  const auto& c1 = s.quadrature1().coords;
  const auto& c2 = s.quadrature2().coords;
  os << "node,x1a,x1b,x2a,x2b,value\n";
  for (Eigen::Index k = 0; k < s.node_count(); ++k) {
    const Eigen::Index a = k / s.n2(), b = k % s.n2();
    os << k << ',' << format_double(c1(a, 0)) << ',' << format_double(c1(a, 1)) << ','
       << format_double(c2(b, 0)) << ',' << format_double(c2(b, 1)) << ','
       << format_double(v[k]) << '\n';
  }
}

Eigen::VectorXd read_grid_csv(std::istream& is, const Sector& s) {
  require_grid(s, "read_grid_csv");
  std::string line;
  int lineno = 0;
  if (!next_data_line(is, line, lineno) || line != "node,x1a,x1b,x2a,x2b,value")
    fail(ErrorCode::ConfigError, "grid CSV: missing header node,x1a,x1b,x2a,x2b,value");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(s.node_count());
  Eigen::Index rows = 0;
  while (next_data_line(is, line, lineno)) {
    const auto cols = split(line, ',');
    if (cols.size() != 6)
      fail(ErrorCode::ConfigError, "grid CSV line " + std::to_string(lineno) + ": expected 6 columns");
    const long k = parse_index(cols[0], lineno);
    if (k < 0 || k >= s.node_count())
      fail(ErrorCode::SectorMismatch, "grid CSV line " + std::to_string(lineno) + ": node outside grid");
    v[k] = parse_double(cols[5]);
    ++rows;
  }
  if (rows != s.node_count())
    fail(ErrorCode::SectorMismatch, "grid CSV has " + std::to_string(rows) + " rows, grid has " +
                                        std::to_string(s.node_count()));
  return v;
}

void write_operator_csv(std::ostream& os, const PaneitzOperator& p) {
  const Sector& s = p.sector();
  os << "# metric_tag: " << p.metric_tag() << '\n'
     << "# sector: " << s.label() << '\n'
     << "# manifold: " << s.manifold().describe() << '\n'
     << "# truncation: " << s.manifold().factor1().truncation() << ','
     << s.manifold().factor2().truncation() << '\n'
     << "# convention: " << convention_hash() << '\n';
  const Eigen::Index n = s.size();
  if (p.dense()) {
    os << "# matrix: stiffness <phi_i, P phi_j> in the rescaled measure\n";
    const Eigen::MatrixXd& A = p.dense()->stiffness;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) os << (j ? "," : "") << format_double(A(i, j));
      os << '\n';
    }
    return;
  }
  os << "# matrix: diagonal symbol\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      os << (j ? "," : "") << (i == j ? format_double(p.symbol()[i]) : std::string("0"));
    os << '\n';
  }
}

}  // namespace qcurv::io
