#pragma once

#include "sscontrol/backward.hpp"
#include "sscontrol/coefficients.hpp"
#include "sscontrol/grid.hpp"
#include "sscontrol/tree.hpp"

#include <optional>

namespace sscontrol {

/// Boundary control u (rows = boundary nodes, supported on Γ0) and internal
/// diffusion control g (rows = interior nodes), both on levels 0..K−1.
struct ControlPair {
  AdaptedField u;
  AdaptedField g;

  static ControlPair zero(const Grid& grid, const FiltrationTree& tree);
};

/// y on levels 0..K, read as H⁻¹-valued.
struct ForwardState {
  AdaptedField y;
};

/// Transposition solution of the controlled forward equation, defined as the
/// exact discrete adjoint of BackwardSolver: for every level j and every
/// F_j-datum z_j,
///   E⟨y(t_j), z_j⟩ − ⟨y0, z(0)⟩
///     = Σ_{k<j} Δt·E[⟨u_k, ∂z_k/∂ν⟩_{Γ0} + ⟨f_k, z_k⟩ + ⟨g_k, Z_k⟩]
/// with (z, Z) the backward solution from z_j.
class ForwardSolver {
 public:
  ForwardSolver(const Grid& grid, const FiltrationTree& tree, const ForwardCoefficients& coefficients,
                Gamma0Mask gamma0);

  /// Adjoint of a backward solver with the given dual coefficients directly.
  ForwardSolver(const Grid& grid, const FiltrationTree& tree, const DualCoefficients& dual, Gamma0Mask gamma0);

  /// Throws std::invalid_argument on shape mismatch or u nonzero off Γ0.
  ForwardState solve(const GridFunction& y0, const ControlPair& controls,
                     const AdaptedField* source = nullptr) const;

  const BackwardSolver& backward() const { return backward_; }
  const Grid& grid() const { return backward_.grid(); }
  const FiltrationTree& tree() const { return backward_.tree(); }
  const Gamma0Mask& gamma0() const { return gamma0_; }

  /// Forward coefficients when built from them (mean_evolution_check needs them).
  const std::optional<ForwardCoefficients>& forward_coefficients() const { return forward_; }

  /// Deterministic noise-free semigroup step S_h: y ↦ i·M⁻ᴴ y at level k (deterministic levels only).
  GridFunction semigroup_step(int k, const GridFunction& y) const;

 private:
  void check_controls(const ControlPair& controls, const AdaptedField* source) const;

  BackwardSolver backward_;
  Gamma0Mask gamma0_;
  std::optional<ForwardCoefficients> forward_;
};

struct DualityTerms {
  cd lhs_final;   ///< E⟨y(τ), z_τ⟩
  cd lhs_initial; ///< ⟨y0, z(0)⟩
  cd boundary;    ///< Σ Δt E⟨u, ∂z/∂ν⟩_{Γ0}
  cd source;      ///< Σ Δt E⟨f, z⟩
  cd diffusion;   ///< Σ Δt E⟨g, Z⟩
  double gap = 0.0;  ///< |lhs − rhs| normalized by the sum of term magnitudes
};

/// Evaluate both sides of the transposition identity at τ = t_level for the datum z_τ.
DualityTerms duality_gap(const ForwardSolver& solver, const ForwardState& state, const GridFunction& y0,
                         const ControlPair& controls, const AdaptedField* source, const LevelValues& z_tau,
                         int level = -1);

struct MeanEvolution {
  GridFunction mean_final;       ///< E y(T)
  GridFunction semigroup_image;  ///< S_h(T)·E y0
  double discrepancy = 0.0;      ///< |E y(T) − S_h(T) E y0|_{Hm1}
};

/// The u ≡ 0, f ≡ 0, a1 = a2 = 0, a3 = 1 instance: E y(T) against the
/// noise-free stepper. Throws ConfigError if the solver or data violate it.
MeanEvolution mean_evolution_check(const ForwardSolver& solver, const GridFunction& y0, const ControlPair& controls,
                                   const AdaptedField* source = nullptr);

MeanEvolution mean_evolution_check(const Grid& grid, const FiltrationTree& tree, const GridFunction& y0,
                                   const AdaptedField& g);

/// S_h(T)·y for deterministic y.
GridFunction semigroup(const ForwardSolver& solver, const GridFunction& y);

/// |E y1 − S_h(T) E y0|_{Hm1}: no g-only control can bring y(T) closer to y1.
double mean_obstruction(const ForwardSolver& solver, const GridFunction& y0, const LevelValues& y1);

struct WellPosedness {
  double max_state = 0.0;  ///< max_k |y(t_k)|_{L²(Ω;Hm1)}
  double data = 0.0;       ///< |y0|_{Hm1} + |f|_{L²_F L²} + |u|_{L²_F L²(Γ0)} + |g|_{L²_F Hm1}
  double c_hat_r1 = 0.0;   ///< smallest Ĉ ≥ 0 with max_state ≤ e^{Ĉ·r1}·data
  double c_hat_r2 = 0.0;   ///< same against r2
  double r1 = 1.0;
  double r2 = 1.0;
};

WellPosedness wellposedness_constants(const ForwardSolver& solver, const ForwardState& state, const GridFunction& y0,
                                      const ControlPair& controls, const AdaptedField* source = nullptr);

}  // namespace sscontrol
