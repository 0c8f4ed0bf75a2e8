#pragma once

#include "sscontrol/backward.hpp"
#include "sscontrol/grid.hpp"
#include "sscontrol/tree.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace sscontrol {

/// Parameters of the weight ψ(x) = |x − x0|² + σ and
///   ℓ(t,x) = s(e^{4λψ} − e^{5λ|ψ|∞}) / (t²(T−t)²),  φ = e^{4λψ} / (t²(T−t)²),  θ = e^ℓ,
/// where |ψ|∞ is the maximum of ψ over the closed box.
struct WeightParams {
  int dim = 1;
  Point x0{};
  double sigma = 0.0;
  double s = 1.0;
  double lambda = 1.0;
  double horizon = 1.0;
  double psi_max = 0.0;

  /// Validates and fills psi_max. A negative `sigma` selects sigma_min.
  /// Throws ConfigError (keys weights.x0, weights.sigma, weights.s, weights.lambda, tree.T).
  static WeightParams make(const Grid& grid, std::span<const double> x0, double sigma, double s, double lambda,
                           double horizon);

  WeightParams with(double s_value, double lambda_value) const;

  double psi(const Point& x) const;
  /// |∇ψ|² = 4|x − x0|².
  double grad_psi_sq(const Point& x) const;
};

/// Smallest σ ≥ 0 with ψ ≥ (5/6)|ψ|∞ on the closed box:
/// 5·max|x − x0|² − 6·min|x − x0|², clamped at 0. ConfigError if x0 lies in the box.
double sigma_min(const Grid& grid, std::span<const double> x0);

struct WeightValues {
  double psi = 0.0;
  double ell = 0.0;        ///< also log θ
  double log_phi = 0.0;
  double log_theta = 0.0;
};

/// DomainError unless 0 < t < T.
WeightValues weights(const WeightParams& p, double t, const Point& x);

/// Closed-form ∂ℓ/∂t and ∂²ℓ/∂t².
double ell_t(const WeightParams& p, double t, const Point& x);
double ell_tt(const WeightParams& p, double t, const Point& x);

struct TimeBounds {
  double c1_hat = 0.0;  ///< max |ℓ_t| / (s φ^{3/2})
  double c2_hat = 0.0;  ///< max |ℓ_tt| / (s φ²)
};

/// Maximizes the two ratios over the product of `times` (interior) and `points`.
TimeBounds weight_time_bounds(const WeightParams& p, std::span<const double> times, std::span<const Point> points);

/// Coefficients of the weighted identity with Ψ = −Δℓ. Raw values can overflow
/// for large s, λ; the normalized fields are always finite.
struct CarlemanCoefficients {
  double log_phi = 0.0;
  double grad_psi_sq = 0.0;
  double A = 0.0;             ///< Σ ℓ_j² = 16s²λ²φ²|∇ψ|²
  double D = 0.0;             ///< D_leading + D_cubic + D_lower + D_time
  double D_leading = 0.0;     ///< 1024 s³λ⁴φ³|∇ψ|⁴
  double D_cubic = 0.0;       ///< 512 s³λ³φ³|∇ψ|²
  double D_lower = 0.0;       ///< −sφ(256λ⁴|∇ψ|⁴ + (256n+512)λ³|∇ψ|² + (64n²+128n)λ²)
  double D_time = 0.0;        ///< ℓ_tt
  double D_ratio = 0.0;       ///< D / (s³λ⁴φ³|∇ψ|⁴)
  Eigen::Matrix2d cjk = Eigen::Matrix2d::Zero();             ///< 32sλ²φψ_jψ_k + 16sλφψ_jk (top-left n×n)
  Eigen::Matrix2d cjk_over_slphi = Eigen::Matrix2d::Zero();  ///< cjk / (sλφ)
};

CarlemanCoefficients coefficients(const WeightParams& p, double t, const Point& x);

/// 2ℓ_jk − δ_jkΔℓ − δ_jkΨ = 2ℓ_jk = 32sλ²φψ_jψ_k + 16sλφδ_jk, divided by sλφ.
Eigen::Matrix2d cjk_hessian_over_slphi(const WeightParams& p, const Point& x);

/// Σ_jk c_jk (v_j v̄_k + v_k v̄_j) for a real symmetric c and complex v (first n entries).
double cjk_quadratic_form(const Eigen::Matrix2d& c, const Eigen::Vector2cd& v, int dim);

struct ThresholdResult {
  bool found = false;
  double s = 0.0;
  double lambda = 0.0;
  double min_ratio = 0.0;  ///< min D ratio over the grid at the returned (or best failing) pair
  // Failure witness: the worst node of the best pair tried.
  double witness_t = 0.0;
  Point witness_x{};
  int pairs_tried = 0;
};

/// Smallest λ in `lambdas` (ascending) for which some s in `s_values` gives
/// D ≥ s³λ⁴φ³|∇ψ|⁴ at every (t, x) of the verification grid; the smallest such s.
/// ConfigError on an empty range.
ThresholdResult positivity_threshold(const WeightParams& base, std::span<const double> s_values,
                                     std::span<const double> lambdas, std::span<const double> times,
                                     std::span<const Point> points);

/// Minimum D ratio over the verification grid, with its location.
ThresholdResult d_ratio_min(const WeightParams& p, std::span<const double> times, std::span<const Point> points);

struct CarlemanFunctional {
  double log_lhs = 0.0;  ///< log E Σ Δt θ²(s³λ⁴φ³|z|² + sλφ|∇z|²)
  double log_rhs = 0.0;  ///< log of E Σ Δt θ²(s²λ²φ²|Z|² + |∇Z|²) + E Σ Δt ∫_{Γ0} θ² sλφ|∂z/∂ν|²
  double log_constant = 0.0;
  double constant = 0.0;  ///< LHS / RHS_core
  bool vacuous = false;   ///< LHS = RHS = 0
  bool violation = false; ///< RHS = 0 < LHS
};

/// Weighted functional over the interior levels 1..final_level−1 (θ vanishes at
/// both endpoints), accumulated in log space.
CarlemanFunctional carleman_functional(const Grid& grid, const FiltrationTree& tree, const BackwardSolution& sol,
                                       const Gamma0Mask& gamma0, const WeightParams& p);

}  // namespace sscontrol
