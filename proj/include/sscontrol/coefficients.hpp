#pragma once

#include "sscontrol/grid.hpp"
#include "sscontrol/tree.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace sscontrol {

/// Coefficient field on levels 0..K−1. Each level holds either one column
/// (deterministic at that level, shared by every node) or one column per node.
template <class Scalar>
class LevelCoefficient {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LevelCoefficient() = default;

  static LevelCoefficient constant(const Grid& grid, const FiltrationTree& tree, Scalar value) {
    LevelCoefficient c;
    c.levels_.assign(static_cast<std::size_t>(tree.levels()), Matrix::Constant(grid.size(), 1, value));
    return c;
  }

  /// f(t, x) sampled per level; the result is deterministic.
  static LevelCoefficient deterministic(const Grid& grid, const FiltrationTree& tree,
                                        const std::function<Scalar(double, const Point&)>& f) {
    LevelCoefficient c;
    for (int k = 0; k < tree.levels(); ++k) {
      Matrix m(grid.size(), 1);
      for (Eigen::Index i = 0; i < grid.size(); ++i) m(i, 0) = f(tree.time(k), grid.node(i));
      c.levels_.push_back(std::move(m));
    }
    return c;
  }

  /// f(level, node, x) sampled at every tree node: an adapted field.
  static LevelCoefficient adapted(const Grid& grid, const FiltrationTree& tree,
                                  const std::function<Scalar(int, Eigen::Index, const Point&)>& f) {
    LevelCoefficient c;
    for (int k = 0; k < tree.levels(); ++k) {
      Matrix m(grid.size(), tree.node_count(k));
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < grid.size(); ++i) m(i, j) = f(k, j, grid.node(i));
      c.levels_.push_back(std::move(m));
    }
    return c;
  }

  static LevelCoefficient from_levels(std::vector<Matrix> levels) {
    LevelCoefficient c;
    c.levels_ = std::move(levels);
    return c;
  }

  int level_count() const { return static_cast<int>(levels_.size()); }
  bool empty() const { return levels_.empty(); }
  bool deterministic_at(int k) const { return level(k).cols() == 1; }
  bool deterministic() const {
    for (const auto& m : levels_)
      if (m.cols() != 1) return false;
    return true;
  }

  const Matrix& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }

  /// Value at node j of level k (deterministic levels ignore j).
  Vector at(int k, Eigen::Index node) const {
    const auto& m = level(k);
    return m.col(m.cols() == 1 ? 0 : node);
  }

  bool all_finite() const {
    for (const auto& m : levels_)
      if (!m.allFinite()) return false;
    return true;
  }

 private:
  std::vector<Matrix> levels_;
};

using RealCoefficient = LevelCoefficient<double>;
using ComplexCoefficient = LevelCoefficient<cd>;

/// Discrete W^{1,∞} sup norm: max over levels and nodes of the values and of
/// the one-sided difference quotients (ghost values 0 where `zero_boundary`).
double w1inf_norm(const Grid& grid, const RealCoefficient& c, bool zero_boundary);
double w1inf_norm(const Grid& grid, const ComplexCoefficient& c, bool zero_boundary);

/// Coefficients of the backward equation
///   i dz + Δz dt = (b1·∇z + b2 z + b3 Z) dt + Z dB,
/// with b1 = −i·c1 for a real vector field c1 vanishing on Γ.
struct DualCoefficients {
  std::vector<RealCoefficient> c1;  ///< one component per axis
  ComplexCoefficient b2;
  ComplexCoefficient b3;

  static DualCoefficients zero(const Grid& grid, const FiltrationTree& tree);

  /// Validates shapes against grid/tree; throws ConfigError on mismatch or non-finite values.
  void validate(const Grid& grid, const FiltrationTree& tree) const;

  bool deterministic() const;

  /// r1 = |b1|²_{W1∞} + |b2|²_{W1∞} + |b3|²_{W1∞} + 1.
  double r1(const Grid& grid) const;
};

/// Coefficients of the controlled forward equation
///   i dy + Δy dt = (a1·∇y + a2 y + f) dt + (a3 y + g) dB,
/// with i·a1 = r a real vector field vanishing on Γ (so a1 = −i·r).
struct ForwardCoefficients {
  std::vector<RealCoefficient> ia1;
  ComplexCoefficient a2;
  ComplexCoefficient a3;

  static ForwardCoefficients zero(const Grid& grid, const FiltrationTree& tree);

  /// The instance a1 = a2 = 0, a3 = 1.
  static ForwardCoefficients unit_noise(const Grid& grid, const FiltrationTree& tree);

  void validate(const Grid& grid, const FiltrationTree& tree) const;

  /// b1 = −a1, b2 = −div(a1) + a2, b3 = −a3 (div by centered differences, zero ghosts).
  DualCoefficients dual(const Grid& grid) const;

  /// r2 = |a1|²_{W1∞} + |a2|²_{W1∞} + |a3|²_{W1∞} + 1.
  double r2(const Grid& grid) const;

  /// True when a1 ≡ 0, a2 ≡ 0 and a3 ≡ 1 exactly.
  bool is_unit_noise() const;
};

}  // namespace sscontrol
