// qcurv: command-line front end for the Q-curvature laboratory.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "qcurv/app/commands.hpp"
#include "qcurv/error.hpp"
#include "qcurv/kernels.hpp"

int main(int argc, char** argv) {
  qcurv::kernels::apply_thread_env();

  CLI::App app{"Paneitz / Q-curvature experiments on product 4-manifolds"};
  app.require_subcommand(1, 1);

  qcurv::app::CommandOptions opts;
  std::string sector;
  std::uint64_t seed = 0;
  double tol = 0;
  double target = 0;

  const std::map<std::string, std::string> about = {
      {"describe", "curvature, symbol, k_Q, kernel and N(Q) of the background"},
      {"scan-kernel", "kernel dimension along the configured size scan"},
      {"invariance-suite", "k_Q and Q(u) drift over random conformal factors"},
      {"check-forbidden", "classify a field as a forbidden Q-curvature"},
      {"decompose", "split a kernel element into constant and N(Q) parts"},
      {"report-harmonics", "dim N(P), dim dN(P) and b1"},
      {"solve-qflat", "solve P w = -Q for a Q-flat metric"},
      {"iterate-constq", "iterate toward constant Q = target"},
  };
  for (const std::string& name : qcurv::app::command_names()) {
    const auto it = about.find(name);
    CLI::App* sub = app.add_subcommand(name, it == about.end() ? "" : it->second);
    sub->add_option("--manifold", opts.manifold_path, "experiment config (JSON)")->required();
    sub->add_option("--sector", sector, "full | factor1")
        ->check(CLI::IsMember({"full", "factor1"}));
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--tol", tol, "kernel zero threshold relative to ||P||")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", opts.out_dir, "output directory (default: stdout)");
    sub->add_option("--format", opts.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    if (name == "check-forbidden") sub->add_option("--field", opts.field_path, "field CSV")->required();
    if (name == "decompose") sub->add_option("--field", opts.field_path, "field CSV in N(P)");
    if (name == "decompose" || name == "solve-qflat" || name == "iterate-constq")
      sub->add_option("--omega0", opts.omega0_path, "starting conformal factor (field CSV)");
    if (name == "iterate-constq") sub->add_option("--target", target, "constant Q target");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help prints and exits 0; usage errors share the generic error code.
    return app.exit(e) == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  opts.command = sub->get_name();
  if (sub->count("--sector")) opts.sector = qcurv::sector_kind_from_string(sector);
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--tol")) opts.tol = tol;
  if (opts.command == "iterate-constq" && sub->count("--target")) opts.target = target;

  try {
    return qcurv::app::run_command(opts, std::cout);
  } catch (const qcurv::Error& e) {
    std::cerr << "qcurv " << opts.command << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "qcurv " << opts.command << ": " << e.what() << '\n';
    return 1;
  }
}
