// Experiment runner: one subcommand per experiment family.

#include "sscontrol/config.hpp"
#include "sscontrol/errors.hpp"
#include "sscontrol/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kSolver = 3, kCheck = 4 };

void print_report(const sscontrol::Report& r, const std::string& out) {
  std::cout << r.experiment << " (" << r.seconds << " s)\n";
  for (const auto& [name, entry] : r.summary["scalars"].items()) std::cout << "  " << name << " = " << entry["value"] << '\n';
  for (const auto& [name, ok] : r.summary["checks"].items())
    std::cout << "  check " << name << ": " << (ok.get<bool>() ? "pass" : "FAIL") << '\n';
  std::cout << "  wrote " << r.tables.size() << " tables and report.json to " << out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact controllability toolkit for a stochastic Schrodinger equation on a Brownian tree"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out = "out";
  std::optional<std::string> seed, tol;
  bool quiet = false, check = false;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "RNG seed (overrides run.seed)");
  app.add_option("--tol", tol, "CG tolerance (overrides control.tol)");
  app.add_flag("--quiet", quiet, "no console summary");
  app.add_flag("--check", check, "exit 4 when an acceptance check fails");

  for (const auto& name : sscontrol::experiment_names()) app.add_subcommand(name, "run the " + name + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  sscontrol::Report report;
  try {
    auto cfg = config_path.empty() ? sscontrol::ExperimentConfig{} : sscontrol::ExperimentConfig::load(config_path);
    if (seed) cfg.set("run.seed", *seed);
    if (tol) cfg.set("control.tol", *tol);
    report = sscontrol::run_experiment(experiment, cfg);
  } catch (const sscontrol::ConfigError& e) {
    std::cerr << "config error";
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << ": " << e.what() << '\n';
    return kConfig;
  } catch (const sscontrol::SolverError& e) {
    std::cerr << "solver error";
    if (e.level() >= 0) std::cerr << " at level " << e.level();
    std::cerr << ": " << e.what() << '\n';
    return kSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    sscontrol::emit_tables(report, out);
  } catch (const std::exception& e) {
    std::cerr << "output error [--out]: " << e.what() << '\n';
    return kConfig;
  }
  if (!quiet) print_report(report, out);
  if (check && !report.checks_passed) return kCheck;
  return kOk;
}
