#pragma once

#include "sscontrol/coefficients.hpp"
#include "sscontrol/grid.hpp"
#include "sscontrol/tree.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sscontrol {

/// Piecewise-linear profile along axis 0: sorted (x, value) knots, constant
/// extension outside the knot range.
struct CoefficientTable {
  std::vector<double> x;
  std::vector<cd> values;

  cd operator()(double at) const;
};

struct CoefficientSpec {
  std::string kind = "random";  ///< random | zero | constant | table | unit_noise
  double amplitude = 0.5;
  bool adapted = true;
  cd a2{0.0, 0.0};
  cd a3{0.0, 0.0};
  std::optional<CoefficientTable> ia1_table;
  std::optional<CoefficientTable> a2_table;
  std::optional<CoefficientTable> a3_table;
};

/// Every experiment setting, with defaults for the 1D instance G = (0,1),
/// m = 15, K = 6, T = 1, x0 = −1. See docs/config.md for the key list.
struct ExperimentConfig {
  std::vector<std::pair<double, double>> extents{{0.0, 1.0}};
  std::vector<int> counts{15};
  double horizon = 1.0;
  int levels = 6;
  CoefficientSpec coeff;

  std::vector<double> x0{-1.0};
  double sigma = -1.0;  ///< negative: sigma_min
  double s = 1.0;
  double lambda = 1.0;

  std::vector<double> s_values{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> lambda_values{0.01, 0.1, 1.0, 2.0, 4.0};
  int carleman_times = 64;
  int cjk_samples = 100000;
  int functional_samples = 20;

  double tol = 1e-6;
  int max_iter = 500;
  int targets = 5;
  std::string target_kind = "white";  ///< white | smooth

  int duality_samples = 10;
  int observability_samples = 50;
  int observability_refine = 1;  ///< also run at 2K (Δt halved)

  std::string noncontrol_target = "mean_shift";  ///< mean_shift | zero_mean | zero
  double noncontrol_shift = 1.0;

  std::uint64_t seed = 1;

  /// Parse `key = value` lines ('#' comments). Throws ConfigError naming the key
  /// for unknown keys, duplicates, malformed values and failed validation.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::string& path);

  /// Apply one key; throws ConfigError.
  void set(const std::string& key, const std::string& value);

  /// Checks every downstream precondition (grid, tree, x0, weights, ranges).
  void validate() const;

  /// Effective settings, for report echo.
  std::map<std::string, std::string> echo() const;

  Grid make_grid() const;
  FiltrationTree make_tree() const;
  FiltrationTree make_tree(int levels_override) const;
  ForwardCoefficients make_coefficients(const Grid& grid, const FiltrationTree& tree) const;
};

}  // namespace sscontrol
