// releq <validate|find|verify|integrate|saari> <system.json> [report.json] [flags]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "releq/cli.hpp"

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("list", "not a number: '" + tok + "'");
    }
    if (used != tok.size()) throw CLI::ValidationError("list", "not a number: '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("list", "empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find and verify relative equilibria of invariant Lagrangian systems"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1, 1);
  releq::cli::RunConfig cfg;
  std::string mu, xi, out;
  std::optional<double> T, h;

  auto common = [&](CLI::App* sub, bool report) {
    sub->add_option("system", cfg.system_path, "system definition (JSON)")->required();
    if (report) sub->add_option("report", cfg.report_path, "report produced by find")->required();
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out, "write output here instead of stdout");
  };

  auto* validate = app.add_subcommand("validate", "load a system and run the load-time checks");
  common(validate, false);

  auto* find = app.add_subcommand("find", "search for relative equilibria");
  common(find, false);
  find->add_option("--mu", mu, "fixed momentum, comma separated");
  find->add_option("--xi", xi, "fixed velocity, comma separated");
  find->add_flag("--free", cfg.free, "solve for base point and velocity");
  find->add_option("--seeds", cfg.seeds, "number of solver seeds")->check(CLI::PositiveNumber);
  find->add_option("--rng", cfg.rng, "random seed");
  find->add_option("--tol", cfg.tol, "convergence tolerance")->check(CLI::PositiveNumber);
  find->add_flag("--require-solution", cfg.require_solution, "exit 4 when nothing validates");

  auto* verify = app.add_subcommand("verify", "check candidates against the unreduced dynamics");
  common(verify, true);
  verify->add_option("--T", T, "Euler-Poincare constancy span");
  verify->add_option("--h", h, "coarse oracle step");

  auto* integrate = app.add_subcommand("integrate", "integrate the Euler-Poincare equations");
  common(integrate, false);
  integrate->add_option("--xi0,--xi", xi, "initial velocity, comma separated");
  integrate->add_option("--T", T, "final time");
  integrate->add_option("--h", h, "step");
  integrate->add_option("--every", cfg.every, "write every Nth sample")->check(CLI::PositiveNumber);

  auto* saari = app.add_subcommand("saari", "locked-inertia diagnostics along relative equilibria");
  common(saari, true);
  saari->add_option("--T", T, "orbit span (default one period)");

  try {
    app.parse(argc, argv);
    if (!mu.empty()) cfg.mu = parse_list(mu);
    if (!xi.empty()) cfg.xi = parse_list(xi);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : releq::cli::kInputError;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.T = T;
  cfg.h = h;

  const auto res = releq::cli::run(cfg);
  std::cerr << res.error;
  if (!res.output.empty()) {
    if (out.empty()) {
      std::cout << res.output;
    } else {
      std::ofstream f(out);
      if (!f) {
        std::cerr << "error: cannot write '" << out << "'\n";
        return releq::cli::kInputError;
      }
      f << res.output;
    }
  }
  return res.exit_code;
}
