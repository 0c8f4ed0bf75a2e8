#pragma once

#include "sscontrol/grid.hpp"

#include <Eigen/Core>

#include <vector>

namespace sscontrol {

/// Non-recombining binary Brownian tree on K levels of width Δt = T/K.
///
/// Level k has 2^k nodes, each with probability 2^{-k}. Node j at level k
/// branches into child 2j (increment +√Δt) and child 2j+1 (increment −√Δt).
class FiltrationTree {
 public:
  static constexpr int kMaxLevels = 20;

  /// Throws ConfigError unless T > 0 and 1 ≤ K ≤ 20.
  static FiltrationTree build(double horizon, int levels);

  double horizon() const { return horizon_; }
  int levels() const { return levels_; }
  double dt() const { return dt_; }
  double sqrt_dt() const { return sqrt_dt_; }
  double time(int k) const { return k * dt_; }

  Eigen::Index node_count(int k) const { return Eigen::Index{1} << k; }
  double probability(int k) const;

  static Eigen::Index child(Eigen::Index node, int branch) { return 2 * node + branch; }
  static Eigen::Index parent(Eigen::Index node) { return node / 2; }

  /// ΔB on the branch (0 → +√Δt, 1 → −√Δt).
  double increment(int branch) const { return branch == 0 ? sqrt_dt_ : -sqrt_dt_; }

  /// Brownian path value B(t_k) at node j of level k.
  double path_sum(int k, Eigen::Index node) const;

 private:
  FiltrationTree() = default;
  double horizon_ = 1.0;
  int levels_ = 1;
  double dt_ = 1.0;
  double sqrt_dt_ = 1.0;
};

/// Tree-indexed family of grid-sized vectors: at level k, an (rows × 2^k)
/// matrix whose column j holds the value at node j.
///
/// Rows are usually the interior node count of a Grid; boundary-adapted
/// fields (controls on Γ) use the boundary node count instead.
class AdaptedField {
 public:
  AdaptedField() = default;
  AdaptedField(const FiltrationTree& tree, Eigen::Index rows, int first_level, int last_level);

  int first_level() const { return first_; }
  int last_level() const { return last_; }
  Eigen::Index rows() const { return rows_; }
  bool has_level(int k) const { return k >= first_ && k <= last_; }

  Eigen::MatrixXcd& level(int k);
  const Eigen::MatrixXcd& level(int k) const;

  auto node(int k, Eigen::Index j) { return level(k).col(j); }
  auto node(int k, Eigen::Index j) const { return level(k).col(j); }

  bool all_finite() const;
  bool is_zero() const;

  AdaptedField& operator+=(const AdaptedField& other);
  AdaptedField& operator*=(cd scale);

 private:
  int first_ = 0;
  int last_ = -1;
  Eigen::Index rows_ = 0;
  std::vector<Eigen::MatrixXcd> levels_;
};

/// Result of splitting a pair of children into drift mean and diffusion integrand.
struct MartingaleSplit {
  Eigen::VectorXcd mean;
  Eigen::VectorXcd integrand;
};

/// mean = (z⁺ + z⁻)/2, Z = (z⁺ − z⁻)/(2√Δt); z^± = mean ± Z√Δt exactly.
MartingaleSplit martingale_representation(const Eigen::VectorXcd& up, const Eigen::VectorXcd& down, double dt);

/// E(ξ | F_k) from values at level k+1 (columns of `child_level`).
Eigen::MatrixXcd conditional_expectation(const FiltrationTree& tree, const Eigen::MatrixXcd& child_level);

/// Level-k field (field has to carry level `k`) reduced to its level-`k` parent level.
Eigen::MatrixXcd conditional_expectation(const FiltrationTree& tree, const AdaptedField& field, int k);

/// Probability-weighted average over the nodes of one level.
Eigen::VectorXcd expectation(const FiltrationTree& tree, const Eigen::MatrixXcd& level_values);
Eigen::VectorXcd expectation(const FiltrationTree& tree, const AdaptedField& field, int k);

/// E|·|² in the given grid norm over one level.
double expected_norm_sq(const Grid& grid, const FiltrationTree& tree, const Eigen::MatrixXcd& level_values,
                        NormKind kind);

/// E⟨a, b⟩ over one level (sesquilinear in the grid pairing).
cd expected_inner(const Grid& grid, const FiltrationTree& tree, const Eigen::MatrixXcd& a,
                  const Eigen::MatrixXcd& b);

}  // namespace sscontrol
