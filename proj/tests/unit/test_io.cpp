#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "../support.hpp"
#include "qcurv/app/config.hpp"
#include "qcurv/error.hpp"
#include "qcurv/io.hpp"
#include "qcurv/paneitz.hpp"

using namespace qcurv;

namespace {

std::string config_error(const std::string& text) {
  try {
    app::parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  FAIL("config accepted: " << text);
  return {};
}

const char* kMinimal =
    R"({"manifold": {"factor1": {"kind": "Sphere2", "radius": 1, "lmax": 4},
                   "factor2": {"kind": "FlatTorus2", "periods": [2, 3], "kmax": 2}}})";

}  // namespace

TEST_CASE("doubles round-trip through their shortest decimal form") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 6.02214076e23, -1e-300, 5e-324, 32 * testing::kPi * testing::kPi})
    CHECK(io::parse_double(io::format_double(v)) == v);
  CHECK(io::format_double(0.5) == "0.5");
  CHECK_THROWS_AS(io::parse_double("1.5x"), Error);
  CHECK_THROWS_AS(io::parse_double(""), Error);
}

TEST_CASE("field CSV round trip and validation") {
  const SectorPtr s = testing::full(testing::s2xt2(3, 1));
  const ScalarField f = random_bandlimited(s, 3);
  std::stringstream ss;
  io::write_field_csv(ss, f);
  const std::string text = ss.str();
  CHECK(text.rfind("index,factor1_mode,factor2_mode,coefficient\n", 0) == 0);
  std::istringstream in(text);
  CHECK(io::read_field_csv(in, s).coeffs() == f.coeffs());

  // Same text into a different truncation: rows and labels do not line up.
  const SectorPtr other = testing::full(testing::s2xt2(4, 1));
  std::istringstream in2(text);
  try {
    io::read_field_csv(in2, other);
    FAIL("expected SectorMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorMismatch);
  }
  std::istringstream bad("index,factor1_mode,factor2_mode,coefficient\n0,0:0,0:0,abc\n");
  CHECK_THROWS_AS(io::read_field_csv(bad, s), Error);
}

TEST_CASE("grid CSV carries coordinates and values") {
  const SectorPtr s = testing::full(testing::t4(1));
  const ScalarField f = ScalarField::basis(s, 5);
  std::stringstream ss;
  io::write_grid_csv(ss, f);
  const Eigen::VectorXd v = io::read_grid_csv(ss, *s);
  CHECK((v - synthesize(f)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator CSV has a provenance header") {
  const SectorPtr s = testing::full(testing::s2xs2(1));
  std::ostringstream os;
  io::write_operator_csv(os, assemble_background(s));
  const std::string t = os.str();
  CHECK(t.find("# metric_tag: g") != std::string::npos);
  CHECK(t.find("# convention: " + convention_hash()) != std::string::npos);
}

TEST_CASE("experiment configs parse and echo") {
  const app::ExperimentConfig c = app::parse_config(kMinimal);
  CHECK(c.manifold.factor1().kind() == FactorKind::Sphere2);
  CHECK(c.manifold.factor2().period2() == 3.0);
  CHECK(c.effective_sector() == SectorKind::FullProduct);
  CHECK(c.parsed["manifold"]["factor2"]["kmax"] == 2);
  CHECK(c.samples == 20);

  const app::ExperimentConfig es = app::parse_config(
      R"({"manifold": {"factor1": {"kind": "Sphere2", "radius": 1, "lmax": 4},
                       "factor2": {"kind": "AbstractHyperbolic2", "scale": 1, "genus": 2}},
          "seed": 18446744073709551615, "tolerances": {"kernel": 1e-10},
          "scan": {"from": 0.8, "to": 1.2, "steps": 5}, "omega0": {"seed": 4}, "target": -2})");
  CHECK(es.effective_sector() == SectorKind::Factor1Only);
  CHECK(es.seed == std::numeric_limits<std::uint64_t>::max());
  CHECK(es.tol.kernel == 1e-10);
  CHECK(es.scan.steps == 5);
  REQUIRE(es.omega0);
  CHECK(es.omega0->amplitude == 0.15);
  CHECK(es.target == -2.0);
  // Same text, same hash.
  CHECK(app::parse_config(kMinimal).source_hash == c.source_hash);
}

TEST_CASE("config errors name the position or the field") {
  CHECK(config_error("{\"manifold\": \n  {\"factor1\": ,}}").find("line 2") != std::string::npos);
  CHECK(config_error(R"({"manifold": {"factor1": {"kind": "Sphere2", "radius": -1, "lmax": 4},
      "factor2": {"kind": "Sphere2", "radius": 1, "lmax": 4}}})")
            .find("manifold.factor1.radius") != std::string::npos);
  CHECK(config_error(R"({"manifold": {"factor1": {"kind": "Sphere3", "radius": 1, "lmax": 4},
      "factor2": {"kind": "Sphere2", "radius": 1, "lmax": 4}}})")
            .find("manifold.factor1.kind") != std::string::npos);
  CHECK(config_error(R"({"manifold": {"factor1": {"kind": "Sphere2", "radius": 1, "lmax": 4}}})")
            .find("factor2") != std::string::npos);
  CHECK(config_error(std::string(kMinimal).insert(1, "\"extra\": 1, ")).find("extra") !=
        std::string::npos);
  CHECK(config_error(R"({"manifold": {"factor1": {"kind": "Sphere2", "radius": 1, "lmax": 4},
      "factor2": {"kind": "Sphere2", "radius": 1, "lmax": 4}}, "sector": "half"})")
            .find("sector") != std::string::npos);
  CHECK(config_error(R"({"manifold": {"factor1": {"kind": "Sphere2", "radius": 1, "lmax": 4.5},
      "factor2": {"kind": "Sphere2", "radius": 1, "lmax": 4}}})")
            .find("lmax") != std::string::npos);
  CHECK_THROWS_AS(app::load_config("/nonexistent/config.json"), Error);
}
