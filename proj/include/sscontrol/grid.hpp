#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace sscontrol {

using cd = std::complex<double>;

/// Complex values on the interior nodes of a grid (homogeneous Dirichlet data implied).
using GridFunction = Eigen::VectorXcd;

/// Complex values on the boundary face nodes of a grid.
using BoundaryValues = Eigen::VectorXcd;

using Point = std::array<double, 2>;

enum class NormKind { L2, H10, Hm1 };

/// A node on the boundary Γ where a face meets an interior grid line.
///
/// `inner1` and `inner2` are the interior nodes at distance h and 2h along the
/// inward normal, used by the one-sided normal derivative.
struct FaceNode {
  int axis = 0;
  int side = 0;  ///< -1 for the lower face, +1 for the upper face
  Point x{};
  Point normal{};
  Eigen::Index inner1 = 0;
  Eigen::Index inner2 = 0;
  double weight = 1.0;  ///< surface quadrature weight
};

/// Membership of each boundary face node in Γ0 = {x ∈ Γ : (x − x0)·ν(x) > 0}.
class Gamma0Mask {
 public:
  Gamma0Mask() = default;
  explicit Gamma0Mask(std::vector<bool> flags) : flags_(std::move(flags)) {}

  std::size_t size() const { return flags_.size(); }
  bool operator[](std::size_t i) const { return flags_[i]; }
  std::size_t count() const;

  /// Zero every entry that lies off Γ0.
  BoundaryValues restrict(const BoundaryValues& values) const;

  const std::vector<bool>& flags() const { return flags_; }

 private:
  std::vector<bool> flags_;
};

/// Uniform rectangular grid on G = Π [a_i, b_i], n ∈ {1, 2}, with interior
/// nodes only. Immutable after construction; copies share the factorized
/// Dirichlet Laplacian.
class Grid {
 public:
  /// Throws ConfigError for n ∉ {1,2}, a_i ≥ b_i, non-finite extents or m_i < 2.
  static Grid build(const std::vector<std::pair<double, double>>& extents,
                    const std::vector<int>& interior_counts);

  int dim() const { return dim_; }
  Eigen::Index size() const { return size_; }
  int count(int axis) const { return counts_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }

  /// Quadrature weight of one interior node, Π h_i.
  double cell_volume() const { return cell_volume_; }

  Eigen::Index index(int i0, int i1 = 0) const { return i0 + static_cast<Eigen::Index>(counts_[0]) * i1; }
  Point node(Eigen::Index i) const;

  std::span<const FaceNode> boundary_nodes() const { return faces_; }
  Eigen::Index boundary_size() const { return static_cast<Eigen::Index>(faces_.size()); }

  /// Sample a function of the node coordinates.
  template <class F>
  GridFunction sample(F&& f) const {
    GridFunction v(size_);
    for (Eigen::Index i = 0; i < size_; ++i) v[i] = f(node(i));
    return v;
  }

  // Discrete operators ------------------------------------------------------

  /// Five-point (three-point in 1D) Dirichlet Laplacian.
  GridFunction laplacian_apply(const GridFunction& u) const;
  const Eigen::SparseMatrix<double>& laplacian_matrix() const;

  /// Centered difference along `axis` with zero ghost values.
  GridFunction centered_difference(int axis, const GridFunction& u) const;
  Eigen::VectorXd centered_difference(int axis, const Eigen::VectorXd& u) const;
  const Eigen::SparseMatrix<double>& centered_difference_matrix(int axis) const;

  /// Forward differences on every edge along `axis`, boundary edges included.
  GridFunction edge_gradient(int axis, const GridFunction& u) const;
  Eigen::Index edge_count(int axis) const;
  Point edge_midpoint(int axis, Eigen::Index e) const;

  /// One-sided second-order ∂u/∂ν at every boundary face node.
  BoundaryValues normal_trace(const GridFunction& u) const;

  /// Adjoint of normal_trace for the pairings ⟨·,·⟩_Γ and ⟨·,·⟩_{L²}.
  GridFunction normal_trace_adjoint(const BoundaryValues& b) const;

  Gamma0Mask gamma0_mask(std::span<const double> x0) const;

  // Inner products and norms ------------------------------------------------

  /// ⟨a, b⟩ = Σ w·a·conj(b).
  cd inner(const GridFunction& a, const GridFunction& b) const;
  cd boundary_inner(const BoundaryValues& a, const BoundaryValues& b) const;
  double boundary_norm_sq(const BoundaryValues& b) const;
  double boundary_norm_sq(const BoundaryValues& b, const Gamma0Mask& mask) const;

  double norm_sq(const GridFunction& u, NormKind kind) const;
  double norm(const GridFunction& u, NormKind kind) const;

  /// (−Δ_h)⁻¹ u.
  GridFunction solve_negative_laplacian(const GridFunction& u) const;

  /// g = −Δ_h z, so that ⟨g, w⟩ = ⟨∇z, ∇w⟩ for all w.
  GridFunction hm1_riesz(const GridFunction& z) const;

 private:
  struct Operators;

  Grid() = default;
  void check_size(const GridFunction& u) const;

  int dim_ = 1;
  std::array<int, 2> counts_{1, 1};
  std::array<double, 2> lower_{0, 0};
  std::array<double, 2> upper_{0, 0};
  std::array<double, 2> spacing_{1, 1};
  double cell_volume_ = 1.0;
  Eigen::Index size_ = 0;
  std::vector<FaceNode> faces_;
  std::shared_ptr<const Operators> ops_;
};

}  // namespace sscontrol
