#pragma once

#include "sscontrol/coefficients.hpp"
#include "sscontrol/grid.hpp"
#include "sscontrol/tree.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace sscontrol {

/// Values on the leaves (or on any single level) of the tree: column j is node j.
using LevelValues = Eigen::MatrixXcd;

/// Per-node implicit Euler operator of the backward equation,
///   M = −i·I + Δt·Δ_h − Δt·b1·∇_h − Δt·b2,
/// with b1·∇_h by centered differences. Factorizations are computed once at
/// construction (deterministic levels share one; identical consecutive
/// levels share one) and are read-only afterwards.
class ImplicitStep {
 public:
  ImplicitStep(const Grid& grid, const FiltrationTree& tree, DualCoefficients coefficients);

  const Grid& grid() const { return grid_; }
  const FiltrationTree& tree() const { return tree_; }
  const DualCoefficients& coefficients() const { return coef_; }

  Eigen::MatrixXcd matrix(int k, Eigen::Index node) const;

  /// M⁻¹ rhs. Throws SolverError on a singular matrix or non-finite input.
  GridFunction solve(int k, Eigen::Index node, const GridFunction& rhs) const;

  /// M⁻ᴴ rhs.
  GridFunction solve_adjoint(int k, Eigen::Index node, const GridFunction& rhs) const;

  /// b3 at node j of level k.
  GridFunction b3(int k, Eigen::Index node) const { return coef_.b3.at(k, node); }

 private:
  using Factor = Eigen::PartialPivLU<Eigen::MatrixXcd>;
  std::shared_ptr<const Factor> factor(int k, Eigen::Index node) const;
  std::shared_ptr<const Factor> make_factor(int k, Eigen::Index node) const;

  Grid grid_;
  FiltrationTree tree_;
  DualCoefficients coef_;
  std::vector<std::vector<std::shared_ptr<const Factor>>> cache_;  // empty level → factor on demand
};

/// Solution (z, Z) of the backward equation on levels 0..final_level.
struct BackwardSolution {
  AdaptedField z;     ///< levels 0..final_level
  AdaptedField Z;     ///< levels 0..final_level−1
  AdaptedField flux;  ///< ∂z/∂ν on every boundary node, levels 0..final_level
  int final_level = 0;
  double dt = 0.0;
  double r1 = 1.0;
};

class BackwardSolver {
 public:
  BackwardSolver(const Grid& grid, const FiltrationTree& tree, const DualCoefficients& coefficients);

  /// Solve from z(t_final) = final_datum (one column per node of `final_level`,
  /// default K) down to level 0. Each step splits the children into mean ẑ
  /// and Z = (z⁺ − z⁻)/(2√Δt), then solves M z_k = −i·ẑ + Δt·b3·Z.
  BackwardSolution solve(const LevelValues& final_datum, int final_level = -1) const;

  const ImplicitStep& step() const { return step_; }
  const Grid& grid() const { return step_.grid(); }
  const FiltrationTree& tree() const { return step_.tree(); }
  double r1() const { return r1_; }

 private:
  ImplicitStep step_;
  double r1_;
};

struct EnergyProfile {
  std::vector<double> h10_sq;  ///< E|z(t_k)|²_{H¹₀}, k = 0..final_level
  double z_energy = 0.0;       ///< Σ_l Δt·E|Z(t_l)|²_{H¹₀}
  double c_hat = 0.0;          ///< smallest Ĉ ≥ 0 with the Gronwall bound for every pair
  bool vacuous = false;        ///< zero solution
};

/// Smallest Ĉ ≥ 0 such that, for all k ≤ j,
///   E|z(t_k)|²_{H¹₀} ≤ e^{Ĉ·r1}·(E|z(t_j)|²_{H¹₀} + Σ_l Δt·E|Z(t_l)|²_{H¹₀}).
EnergyProfile energy_profile(const Grid& grid, const FiltrationTree& tree, const BackwardSolution& sol);

/// (Σ_k Δt·E|∂z/∂ν(t_k)|²_{L²(Γ)})^{1/2} / |z_τ|_{L²(Ω;H¹₀)}, k = 0..final_level−1; 0 for zero data.
double hidden_regularity_ratio(const Grid& grid, const FiltrationTree& tree, const BackwardSolution& sol);

}  // namespace sscontrol
