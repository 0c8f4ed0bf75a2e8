#pragma once

#include "sscontrol/backward.hpp"
#include "sscontrol/forward.hpp"

#include <cstdint>
#include <vector>

namespace sscontrol {

enum class Channels { Both, DiffusionOnly };

/// Λ: z_T ↦ y(T), where (z, Z) solves the backward equation from z_T, the
/// controls are u = ∂z/∂ν on Γ0 and g = −Δ_h Z, and y solves the forward
/// equation from y0 = 0 with f = 0. Hermitian and positive semidefinite in
/// ⟪a, b⟫ = E⟨a, b⟩ over the leaves:
///   ⟪Λa, a⟫ = Σ_k Δt·E(|∂z/∂ν|²_{L²(Γ0)} + |Z|²_{H¹₀}).
class Gramian {
 public:
  explicit Gramian(ForwardSolver solver, Channels channels = Channels::Both);

  LevelValues apply(const LevelValues& z_final) const;
  ControlPair controls_from(const BackwardSolution& sol) const;
  double observation_energy(const BackwardSolution& sol) const;
  cd pairing(const LevelValues& a, const LevelValues& b) const;

  const ForwardSolver& solver() const { return solver_; }
  const Grid& grid() const { return solver_.grid(); }
  const FiltrationTree& tree() const { return solver_.tree(); }
  Channels channels() const { return channels_; }

 private:
  ForwardSolver solver_;
  Channels channels_;
};

struct ConvergenceEntry {
  int iteration = 0;
  double hm1_residual = 0.0;       ///< |y(T) − y1|_{E,Hm1} of the iterate
  double relative_residual = 0.0;  ///< hm1_residual over the reference norm
  double pairing_residual = 0.0;   ///< ⟪r, r⟫^{1/2} / ⟪r0, r0⟫^{1/2}
  double energy = 0.0;             ///< ½⟪Λx, x⟫ − Re⟪b, x⟫, nonincreasing
  double mean_drift = 0.0;         ///< |E(Λx)|_{Hm1}
  double seconds = 0.0;
};

struct ConvergenceLog {
  double initial_hm1_residual = 0.0;
  double reference_norm = 0.0;
  std::vector<ConvergenceEntry> entries;
};

struct SynthesisOptions {
  double tol = 1e-6;
  int max_iter = 500;
};

struct SynthesisResult {
  ControlPair controls;
  LevelValues z_star;
  LevelValues y_final;            ///< verified forward solve with the extracted controls
  double relative_residual = 0.0; ///< of y_final against y1
  int iterations = 0;
  bool converged = false;
  bool stalled = false;           ///< ⟪Λp, p⟫ reached round-off
  ConvergenceLog log;
};

/// CG in ⟪·,·⟫ on Λ z = y1 − y_free(T), stopped when |y(T) − y1|_{E,Hm1} ≤ tol·|y1|_{E,Hm1}
/// (the initial residual replaces |y1| when y1 = 0). Non-convergence is flagged, not
/// thrown; SolverError when ⟪Λp, p⟫ is negative beyond round-off.
SynthesisResult synthesize_controls(const Gramian& gramian, const GridFunction& y0, const LevelValues& y1,
                                    const SynthesisOptions& options = {});

struct ObservabilityStats {
  std::vector<double> ratios;  ///< |z_T|²_{E,H¹₀} / observation energy, per sample
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double min_eigenvalue = 0.0;  ///< inverse power iteration on Λ in ⟪·,·⟫
  int power_iterations = 0;
};

/// Observability quotient of one final datum; infinite when the observation vanishes.
double observability_ratio(const Gramian& gramian, const LevelValues& z_final);

ObservabilityStats observability_stats(const Gramian& gramian, int sample_count, std::uint64_t seed);

/// Λ as a Hermitian matrix in an E⟨·,·⟩-orthonormal basis of final data
/// (one column per leaf and node). Costs one Gramian application per column.
Eigen::MatrixXcd dense_gramian(const Gramian& gramian);

/// Smallest eigenvalue of Λ by inverse iteration with inner CG.
double gramian_min_eigenvalue(const Gramian& gramian, std::uint64_t seed, int* iterations = nullptr);

struct UnreachabilityCertificate {
  double lower_bound = 0.0;            ///< |E y1 − S_h(T)E y0|_{Hm1}
  std::vector<double> residuals;       ///< |y(T) − y1|_{E,Hm1} per iterate, starting with the free state
  double min_residual = 0.0;
  double final_relative_residual = 0.0;
  double max_mean_drift = 0.0;         ///< max_k |E y(T) of iterate k − E y_free(T)|_{Hm1}
  bool bound_respected = false;        ///< min_residual ≥ lower_bound − 1e−10
  bool unreachable = false;            ///< lower_bound above round-off
  int iterations = 0;
  bool converged = false;
};

/// g-only synthesis on the instance a1 = a2 = 0, a3 = 1, u ≡ 0, f = 0.
UnreachabilityCertificate unreachability_demo(const Grid& grid, const FiltrationTree& tree, const GridFunction& y0,
                                              const LevelValues& y1, const SynthesisOptions& options = {});

}  // namespace sscontrol
