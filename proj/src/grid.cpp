#include "sscontrol/grid.hpp"

#include "sscontrol/errors.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>

namespace sscontrol {

struct Grid::Operators {
  Eigen::SparseMatrix<double> laplacian;
  std::array<Eigen::SparseMatrix<double>, 2> centered;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> neg_laplacian;
};

std::size_t Gamma0Mask::count() const {
  std::size_t n = 0;
  for (bool f : flags_) n += f ? 1 : 0;
  return n;
}

BoundaryValues Gamma0Mask::restrict(const BoundaryValues& values) const {
  if (static_cast<std::size_t>(values.size()) != flags_.size())
    throw std::invalid_argument("Gamma0Mask::restrict: size mismatch");
  BoundaryValues out = values;
  for (std::size_t i = 0; i < flags_.size(); ++i)
    if (!flags_[i]) out[static_cast<Eigen::Index>(i)] = 0.0;
  return out;
}

Grid Grid::build(const std::vector<std::pair<double, double>>& extents,
                 const std::vector<int>& interior_counts) {
  const auto n = extents.size();
  if (n < 1 || n > 2) throw ConfigError("grid: dimension must be 1 or 2", "grid.extents");
  if (interior_counts.size() != n)
    throw ConfigError("grid: need one interior count per axis", "grid.counts");

  Grid g;
  g.dim_ = static_cast<int>(n);
  g.cell_volume_ = 1.0;
  g.size_ = 1;
  for (std::size_t a = 0; a < n; ++a) {
    const auto [lo, hi] = extents[a];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      std::ostringstream os;
      os << "grid: degenerate extent on axis " << a << " [" << lo << ", " << hi << "]";
      throw ConfigError(os.str(), "grid.extents");
    }
    if (interior_counts[a] < 2) {
      std::ostringstream os;
      os << "grid: interior count on axis " << a << " must be >= 2, got " << interior_counts[a];
      throw ConfigError(os.str(), "grid.counts");
    }
    g.lower_[a] = lo;
    g.upper_[a] = hi;
    g.counts_[a] = interior_counts[a];
    g.spacing_[a] = (hi - lo) / (interior_counts[a] + 1);
    g.cell_volume_ *= g.spacing_[a];
    g.size_ *= interior_counts[a];
  }

  // Boundary face nodes: faces ordered (axis 0 low, axis 0 high, axis 1 low, axis 1 high).
  for (int a = 0; a < g.dim_; ++a) {
    for (int side : {-1, +1}) {
      const int near = side < 0 ? 0 : g.counts_[a] - 1;
      const int next = side < 0 ? 1 : g.counts_[a] - 2;
      const double xb = side < 0 ? g.lower_[a] : g.upper_[a];
      if (g.dim_ == 1) {
        FaceNode f;
        f.axis = a;
        f.side = side;
        f.x = {xb, 0.0};
        f.normal = {static_cast<double>(side), 0.0};
        f.inner1 = near;
        f.inner2 = next;
        f.weight = 1.0;
        g.faces_.push_back(f);
      } else {
        const int t = 1 - a;
        for (int j = 0; j < g.counts_[t]; ++j) {
          FaceNode f;
          f.axis = a;
          f.side = side;
          f.x[a] = xb;
          f.x[t] = g.lower_[t] + (j + 1) * g.spacing_[t];
          f.normal = {0.0, 0.0};
          f.normal[a] = side;
          f.inner1 = a == 0 ? g.index(near, j) : g.index(j, near);
          f.inner2 = a == 0 ? g.index(next, j) : g.index(j, next);
          f.weight = g.spacing_[t];
          g.faces_.push_back(f);
        }
      }
    }
  }

  auto ops = std::make_shared<Operators>();
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> lap;
  std::array<std::vector<Trip>, 2> cen;
  for (Eigen::Index i = 0; i < g.size_; ++i) {
    const int i0 = static_cast<int>(i % g.counts_[0]);
    const int i1 = static_cast<int>(i / g.counts_[0]);
    const std::array<int, 2> ij{i0, i1};
    for (int a = 0; a < g.dim_; ++a) {
      const double h2 = g.spacing_[a] * g.spacing_[a];
      lap.emplace_back(i, i, -2.0 / h2);
      for (int step : {-1, +1}) {
        auto nb = ij;
        nb[a] += step;
        if (nb[a] < 0 || nb[a] >= g.counts_[a]) continue;
        const auto j = g.index(nb[0], nb[1]);
        lap.emplace_back(i, j, 1.0 / h2);
        cen[a].emplace_back(i, j, step / (2.0 * g.spacing_[a]));
      }
    }
  }
  ops->laplacian.resize(g.size_, g.size_);
  ops->laplacian.setFromTriplets(lap.begin(), lap.end());
  for (int a = 0; a < 2; ++a) {
    ops->centered[a].resize(g.size_, g.size_);
    ops->centered[a].setFromTriplets(cen[a].begin(), cen[a].end());
  }
  const Eigen::SparseMatrix<double> neg = -ops->laplacian;
  ops->neg_laplacian.compute(neg);
  if (ops->neg_laplacian.info() != Eigen::Success)
    throw SolverError("grid: factorization of -Laplacian failed");
  g.ops_ = std::move(ops);
  return g;
}

Point Grid::node(Eigen::Index i) const {
  const auto i0 = i % counts_[0];
  const auto i1 = i / counts_[0];
  Point p{lower_[0] + (i0 + 1) * spacing_[0], 0.0};
  if (dim_ == 2) p[1] = lower_[1] + (i1 + 1) * spacing_[1];
  return p;
}

void Grid::check_size(const GridFunction& u) const {
  if (u.size() != size_) {
    std::ostringstream os;
    os << "grid function has " << u.size() << " values, grid has " << size_ << " interior nodes";
    throw std::invalid_argument(os.str());
  }
}

GridFunction Grid::laplacian_apply(const GridFunction& u) const {
  check_size(u);
  GridFunction out = GridFunction::Zero(size_);
  for (Eigen::Index i = 0; i < size_; ++i) {
    const int i0 = static_cast<int>(i % counts_[0]);
    const int i1 = static_cast<int>(i / counts_[0]);
    const std::array<int, 2> ij{i0, i1};
    cd acc = 0.0;
    for (int a = 0; a < dim_; ++a) {
      auto lo = ij, hi = ij;
      --lo[a];
      ++hi[a];
      const cd ulo = lo[a] >= 0 ? u[index(lo[0], lo[1])] : cd{};
      const cd uhi = hi[a] < counts_[a] ? u[index(hi[0], hi[1])] : cd{};
      acc += (ulo - 2.0 * u[i] + uhi) / (spacing_[a] * spacing_[a]);
    }
    out[i] = acc;
  }
  return out;
}

const Eigen::SparseMatrix<double>& Grid::laplacian_matrix() const { return ops_->laplacian; }

const Eigen::SparseMatrix<double>& Grid::centered_difference_matrix(int axis) const {
  return ops_->centered.at(axis);
}

GridFunction Grid::centered_difference(int axis, const GridFunction& u) const {
  check_size(u);
  return ops_->centered.at(axis) * u;
}

Eigen::VectorXd Grid::centered_difference(int axis, const Eigen::VectorXd& u) const {
  if (u.size() != size_) throw std::invalid_argument("centered_difference: size mismatch");
  return ops_->centered.at(axis) * u;
}

Eigen::Index Grid::edge_count(int axis) const {
  if (dim_ == 1) return counts_[0] + 1;
  return axis == 0 ? static_cast<Eigen::Index>(counts_[0] + 1) * counts_[1]
                   : static_cast<Eigen::Index>(counts_[0]) * (counts_[1] + 1);
}

Point Grid::edge_midpoint(int axis, Eigen::Index e) const {
  if (dim_ == 1) return {lower_[0] + (e + 0.5) * spacing_[0], 0.0};
  if (axis == 0) {
    const auto e0 = e % (counts_[0] + 1);
    const auto i1 = e / (counts_[0] + 1);
    return {lower_[0] + (e0 + 0.5) * spacing_[0], lower_[1] + (i1 + 1) * spacing_[1]};
  }
  const auto i0 = e % counts_[0];
  const auto e1 = e / counts_[0];
  return {lower_[0] + (i0 + 1) * spacing_[0], lower_[1] + (e1 + 0.5) * spacing_[1]};
}

GridFunction Grid::edge_gradient(int axis, const GridFunction& u) const {
  check_size(u);
  if (axis < 0 || axis >= dim_) throw std::invalid_argument("edge_gradient: bad axis");
  GridFunction out(edge_count(axis));
  const double h = spacing_[axis];
  const int m0 = counts_[0];
  if (dim_ == 1 || axis == 0) {
    const int lines = dim_ == 1 ? 1 : counts_[1];
    for (int l = 0; l < lines; ++l) {
      for (int e = 0; e <= m0; ++e) {
        const cd left = e > 0 ? u[index(e - 1, l)] : cd{};
        const cd right = e < m0 ? u[index(e, l)] : cd{};
        out[static_cast<Eigen::Index>(l) * (m0 + 1) + e] = (right - left) / h;
      }
    }
  } else {
    const int m1 = counts_[1];
    for (int e = 0; e <= m1; ++e) {
      for (int i0 = 0; i0 < m0; ++i0) {
        const cd below = e > 0 ? u[index(i0, e - 1)] : cd{};
        const cd above = e < m1 ? u[index(i0, e)] : cd{};
        out[static_cast<Eigen::Index>(e) * m0 + i0] = (above - below) / h;
      }
    }
  }
  return out;
}

BoundaryValues Grid::normal_trace(const GridFunction& u) const {
  check_size(u);
  BoundaryValues out(boundary_size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto& fn = faces_[f];
    // ∂u/∂ν ≈ (3u_Γ − 4u_1 + u_2)/(2h) with u_Γ = 0.
    out[static_cast<Eigen::Index>(f)] = (-4.0 * u[fn.inner1] + u[fn.inner2]) / (2.0 * spacing_[fn.axis]);
  }
  return out;
}

GridFunction Grid::normal_trace_adjoint(const BoundaryValues& b) const {
  if (b.size() != boundary_size()) throw std::invalid_argument("normal_trace_adjoint: size mismatch");
  GridFunction out = GridFunction::Zero(size_);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto& fn = faces_[f];
    const double scale = fn.weight / (2.0 * spacing_[fn.axis] * cell_volume_);
    const cd v = b[static_cast<Eigen::Index>(f)];
    out[fn.inner1] += -4.0 * scale * v;
    out[fn.inner2] += scale * v;
  }
  return out;
}

Gamma0Mask Grid::gamma0_mask(std::span<const double> x0) const {
  if (static_cast<int>(x0.size()) != dim_)
    throw ConfigError("gamma0_mask: x0 dimension does not match grid", "weights.x0");
  bool inside = true;
  for (int a = 0; a < dim_; ++a) {
    if (!std::isfinite(x0[a])) throw ConfigError("gamma0_mask: x0 not finite", "weights.x0");
    inside = inside && x0[a] >= lower_[a] && x0[a] <= upper_[a];
  }
  if (inside) throw ConfigError("gamma0_mask: x0 must lie outside the closure of G", "weights.x0");
  std::vector<bool> flags(faces_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    double dot = 0.0;
    for (int a = 0; a < dim_; ++a) dot += (faces_[f].x[a] - x0[a]) * faces_[f].normal[a];
    flags[f] = dot > 0.0;
  }
  return Gamma0Mask(std::move(flags));
}

cd Grid::inner(const GridFunction& a, const GridFunction& b) const {
  check_size(a);
  check_size(b);
  // dot() conjugates its argument's first operand: b.dot(a) = Σ conj(b)·a.
  return cell_volume_ * b.dot(a);
}

cd Grid::boundary_inner(const BoundaryValues& a, const BoundaryValues& b) const {
  if (a.size() != boundary_size() || b.size() != boundary_size())
    throw std::invalid_argument("boundary_inner: size mismatch");
  cd acc = 0.0;
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto i = static_cast<Eigen::Index>(f);
    acc += faces_[f].weight * a[i] * std::conj(b[i]);
  }
  return acc;
}

double Grid::boundary_norm_sq(const BoundaryValues& b) const { return boundary_inner(b, b).real(); }

double Grid::boundary_norm_sq(const BoundaryValues& b, const Gamma0Mask& mask) const {
  if (mask.size() != faces_.size()) throw std::invalid_argument("boundary_norm_sq: mask size mismatch");
  double acc = 0.0;
  for (std::size_t f = 0; f < faces_.size(); ++f)
    if (mask[f]) acc += faces_[f].weight * std::norm(b[static_cast<Eigen::Index>(f)]);
  return acc;
}

double Grid::norm_sq(const GridFunction& u, NormKind kind) const {
  check_size(u);
  switch (kind) {
    case NormKind::L2:
      return cell_volume_ * u.squaredNorm();
    case NormKind::H10: {
      double acc = 0.0;
      for (int a = 0; a < dim_; ++a) acc += edge_gradient(a, u).squaredNorm();
      return cell_volume_ * acc;
    }
    case NormKind::Hm1: {
      const double v = inner(solve_negative_laplacian(u), u).real();
      return v > 0.0 ? v : 0.0;
    }
  }
  return 0.0;
}

double Grid::norm(const GridFunction& u, NormKind kind) const { return std::sqrt(norm_sq(u, kind)); }

GridFunction Grid::solve_negative_laplacian(const GridFunction& u) const {
  check_size(u);
  const Eigen::VectorXd re = ops_->neg_laplacian.solve(u.real().eval());
  const Eigen::VectorXd im = ops_->neg_laplacian.solve(u.imag().eval());
  if (ops_->neg_laplacian.info() != Eigen::Success) throw SolverError("grid: -Laplacian solve failed");
  GridFunction out(size_);
  out.real() = re;
  out.imag() = im;
  return out;
}

GridFunction Grid::hm1_riesz(const GridFunction& z) const { return -laplacian_apply(z); }

}  // namespace sscontrol
