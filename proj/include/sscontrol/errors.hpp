#pragma once

#include <stdexcept>
#include <string>

namespace sscontrol {

/// Invalid problem setup: bad extents, counts, horizons, observation points, config keys.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::invalid_argument(what), key_(std::move(key)) {}

  /// Dotted config key that triggered the error, empty when not config-driven.
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Evaluation outside the domain of a formula (e.g. weights at t = 0 or t = T).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear-solve or numerical failure inside a solver pass.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int level = -1)
      : std::runtime_error(what), level_(level) {}

  /// Time level at which the failure happened, -1 when not level specific.
  int level() const noexcept { return level_; }

 private:
  int level_;
};

}  // namespace sscontrol
