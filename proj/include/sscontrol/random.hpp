#pragma once

#include "sscontrol/coefficients.hpp"
#include "sscontrol/grid.hpp"
#include "sscontrol/tree.hpp"

#include <cstdint>
#include <random>

namespace sscontrol {

/// Independent stream keyed by (seed, stream id): the same pair always gives
/// the same sequence regardless of the order in which streams are created.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  double normal() { return normal_(engine_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(engine_); }
  /// Standard complex Gaussian: E|ξ|² = 1.
  cd complex_normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

GridFunction random_grid_function(const Grid& grid, RandomStream& rng);

/// Independent complex Gaussian values at every grid node of every node of `level`.
Eigen::MatrixXcd white_noise_level(const Grid& grid, const FiltrationTree& tree, int level, RandomStream& rng,
                                   Eigen::Index rows = -1);

/// White noise scaled to |·|_{E,H¹₀} = 1.
Eigen::MatrixXcd normalized_white_noise(const Grid& grid, const FiltrationTree& tree, int level, RandomStream& rng);

AdaptedField white_noise_field(const FiltrationTree& tree, Eigen::Index rows, int first, int last,
                               RandomStream& rng);

/// Σ_{modes} (α + β·B + γ·sin B)·e_mode(x) at `level`, with B the path value at
/// the node and e_mode the lowest `modes` Dirichlet sine modes per axis; a
/// smooth functional of the Brownian path.
Eigen::MatrixXcd smooth_functional_level(const Grid& grid, const FiltrationTree& tree, int level, RandomStream& rng,
                                         int modes = 3);

/// Low-mode deterministic field Σ c_m e_m(x).
GridFunction smooth_grid_function(const Grid& grid, RandomStream& rng, int modes = 3);

/// Smooth bounded coefficients of (t, B, x) with i·a1 real and zero on Γ.
/// `adapted` makes them depend on the path value B(t_k).
ForwardCoefficients random_forward_coefficients(const Grid& grid, const FiltrationTree& tree, RandomStream& rng,
                                                double amplitude, bool adapted = true);

/// Smooth bounded dual coefficients (c1 zero on Γ).
DualCoefficients random_dual_coefficients(const Grid& grid, const FiltrationTree& tree, RandomStream& rng,
                                          double amplitude, bool adapted = true);

}  // namespace sscontrol
