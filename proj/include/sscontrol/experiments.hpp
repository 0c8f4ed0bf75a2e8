#pragma once

#include "sscontrol/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace sscontrol {

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Result of one experiment. `summary` holds everything that goes into
/// report.json and is a pure function of the config; `seconds` is kept apart.
struct Report {
  std::string experiment;
  nlohmann::json summary;
  std::vector<Table> tables;
  bool checks_passed = true;
  double seconds = 0.0;

  void scalar(const std::string& name, double value, const std::string& definition);
  void flag(const std::string& name, bool value, const std::string& definition);
  void check(const std::string& name, bool passed);
};

const std::vector<std::string>& experiment_names();

/// Runs `duality`, `observability`, `controllability`, `carleman` or `noncontrol`.
/// Throws ConfigError for an unknown name and propagates solver errors.
Report run_experiment(const std::string& name, const ExperimentConfig& config);

/// Writes every table as CSV, report.json and timing.json into `dir` (created
/// if missing). Throws std::runtime_error when a file cannot be written.
void emit_tables(const Report& report, const std::filesystem::path& dir);

/// Finite doubles as JSON numbers, non-finite ones as "inf", "-inf", "nan".
nlohmann::json json_number(double v);

}  // namespace sscontrol
