#pragma once

// Brute-force reference assemblies. Everything here is built from the grid
// geometry and coefficient values directly, without the solvers' step
// operators, and solved as one dense system over the whole tree.

#include "sscontrol/backward.hpp"
#include "sscontrol/coefficients.hpp"
#include "sscontrol/grid.hpp"
#include "sscontrol/tree.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace oracle {

using sscontrol::cd;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline Index node_at(const sscontrol::Grid& g, const sscontrol::Point& x) {
  // Interior node nearest to x (x is assumed to be a grid point).
  int i0 = static_cast<int>(std::lround((x[0] - g.lower(0)) / g.spacing(0))) - 1;
  int i1 = g.dim() == 2 ? static_cast<int>(std::lround((x[1] - g.lower(1)) / g.spacing(1))) - 1 : 0;
  return g.index(i0, i1);
}

inline Eigen::MatrixXd laplacian(const sscontrol::Grid& g) {
  const Index n = g.size();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto x = g.node(i);
    for (int a = 0; a < g.dim(); ++a) {
      const double h2 = g.spacing(a) * g.spacing(a);
      L(i, i) -= 2.0 / h2;
      for (int sgn : {-1, 1}) {
        auto y = x;
        y[a] += sgn * g.spacing(a);
        if (y[a] > g.lower(a) + 1e-12 && y[a] < g.upper(a) - 1e-12) L(i, node_at(g, y)) += 1.0 / h2;
      }
    }
  }
  return L;
}

inline Eigen::MatrixXd centered(const sscontrol::Grid& g, int axis) {
  const Index n = g.size();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (int sgn : {-1, 1}) {
      auto y = g.node(i);
      y[axis] += sgn * g.spacing(axis);
      if (y[axis] > g.lower(axis) + 1e-12 && y[axis] < g.upper(axis) - 1e-12)
        D(i, node_at(g, y)) += sgn / (2.0 * g.spacing(axis));
    }
  return D;
}

/// Outward one-sided normal derivative, −(4u(h) − u(2h))/(2h), and face weights.
struct Trace {
  Eigen::MatrixXd N;
  Eigen::VectorXd w;
};

inline Trace trace(const sscontrol::Grid& g) {
  const auto faces = g.boundary_nodes();
  Trace t{Eigen::MatrixXd::Zero(static_cast<Index>(faces.size()), g.size()),
          Eigen::VectorXd::Ones(static_cast<Index>(faces.size()))};
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& fn = faces[f];
    const int a = fn.axis;
    const double h = g.spacing(a);
    auto x1 = fn.x, x2 = fn.x;
    x1[a] -= fn.side * h;
    x2[a] -= fn.side * 2.0 * h;
    t.N(static_cast<Index>(f), node_at(g, x1)) = -4.0 / (2.0 * h);
    t.N(static_cast<Index>(f), node_at(g, x2)) = 1.0 / (2.0 * h);
    if (g.dim() == 2) t.w[static_cast<Index>(f)] = g.spacing(1 - a);
  }
  return t;
}

/// Backward step matrix −iI + ΔtΔ_h + iΔt·Σ c1_a ∂_a − Δt·b2 at node j of level k.
inline MatrixXcd step_matrix(const sscontrol::Grid& g, const sscontrol::FiltrationTree& tree,
                             const sscontrol::DualCoefficients& c, int k, Index j) {
  const double dt = tree.dt();
  MatrixXcd M = -cd(0, 1) * MatrixXcd::Identity(g.size(), g.size());
  M += dt * laplacian(g).cast<cd>();
  for (int a = 0; a < g.dim(); ++a)
    M += cd(0, dt) * (c.c1[static_cast<std::size_t>(a)].at(k, j).asDiagonal() * centered(g, a)).cast<cd>();
  M -= dt * MatrixXcd(c.b2.at(k, j).asDiagonal());
  return M;
}

/// Backward map from the level-τ datum to every output, assembled as one dense system.
///
/// Unknown ordering: z at level k, node j, grid point i, for k < τ, level by level.
/// `outputs()` stacks z(0), then per level k < τ and node j: flux, z, Z.
class BackwardMap {
 public:
  BackwardMap(const sscontrol::Grid& g, const sscontrol::FiltrationTree& tree, const sscontrol::DualCoefficients& c,
              int tau)
      : g_(g), tree_(tree), tau_(tau), m_(g.size()), tr_(trace(g)) {
    const Index nb = tr_.N.rows();
    offsets_.push_back(0);
    for (int k = 0; k < tau; ++k) offsets_.push_back(offsets_.back() + tree.node_count(k) * m_);
    const Index n_unknown = offsets_.back();
    const Index n_data = tree.node_count(tau) * m_;

    // A u = B d: M z_k + i·mean − Δt b3 Z = 0 for every inner node.
    MatrixXcd A = MatrixXcd::Zero(n_unknown, n_unknown);
    MatrixXcd B = MatrixXcd::Zero(n_unknown, n_data);
    const double sq = tree.sqrt_dt();
    for (int k = 0; k < tau; ++k)
      for (Index j = 0; j < tree.node_count(k); ++j) {
        const Index row = offsets_[k] + j * m_;
        A.block(row, row, m_, m_) = step_matrix(g, tree, c, k, j);
        const VectorXcd b3 = c.b3.at(k, j);
        for (int br = 0; br < 2; ++br) {
          const Index child = 2 * j + br;
          const double zsign = br == 0 ? 1.0 : -1.0;
          // child coefficient in i·mean − Δt·b3·Z
          MatrixXcd blk = cd(0, 0.5) * MatrixXcd::Identity(m_, m_);
          blk -= tree.dt() * zsign / (2.0 * sq) * MatrixXcd(b3.asDiagonal());
          if (k + 1 < tau)
            A.block(row, offsets_[k + 1] + child * m_, m_, m_) += blk;
          else
            B.block(row, child * m_, m_, m_) -= blk;
        }
      }
    const MatrixXcd Z = A.fullPivLu().solve(B);  // unknowns as a function of the datum

    // Output map.
    auto full = [&](int k, Index j) -> MatrixXcd {
      if (k < tau) return Z.middleRows(offsets_[k] + j * m_, m_);
      MatrixXcd e = MatrixXcd::Zero(m_, n_data);
      e.middleCols(j * m_, m_).setIdentity();
      return e;
    };
    n_out_ = m_;
    for (int k = 0; k < tau; ++k) n_out_ += tree.node_count(k) * (nb + 2 * m_);
    L_ = MatrixXcd::Zero(n_out_, n_data);
    w_ = Eigen::VectorXd::Zero(n_out_);
    L_.topRows(m_) = full(0, 0);
    w_.head(m_).setConstant(g.cell_volume());
    Index r = m_;
    for (int k = 0; k < tau; ++k) {
      const double p = tree.probability(k) * tree.dt();
      for (Index j = 0; j < tree.node_count(k); ++j) {
        const MatrixXcd zk = full(k, j);
        const MatrixXcd Zk = (full(k + 1, 2 * j) - full(k + 1, 2 * j + 1)) / (2.0 * sq);
        L_.middleRows(r, nb) = tr_.N.cast<cd>() * zk;
        w_.segment(r, nb) = p * tr_.w;
        r += nb;
        L_.middleRows(r, m_) = zk;
        w_.segment(r, m_).setConstant(p * g.cell_volume());
        r += m_;
        L_.middleRows(r, m_) = Zk;
        w_.segment(r, m_).setConstant(p * g.cell_volume());
        r += m_;
      }
    }
  }

  const MatrixXcd& outputs() const { return L_; }
  const Eigen::VectorXd& weights() const { return w_; }
  double datum_weight() const { return tree_.probability(tau_) * g_.cell_volume(); }
  Index boundary_rows() const { return tr_.N.rows(); }

  /// Row offset of the (flux, z, Z) block of node j at level k.
  Index block(int k, Index j) const {
    Index r = m_;
    for (int l = 0; l < k; ++l) r += tree_.node_count(l) * (boundary_rows() + 2 * m_);
    return r + j * (boundary_rows() + 2 * m_);
  }

  /// z(t_k) at every node of level k, as columns.
  MatrixXcd z_level(const MatrixXcd& datum, int k) const {
    const VectorXcd out = L_ * datum.reshaped();
    MatrixXcd z(m_, tree_.node_count(k));
    for (Index j = 0; j < z.cols(); ++j)
      z.col(j) = k == 0 ? VectorXcd(out.head(m_)) : VectorXcd(out.segment(block(k, j) + boundary_rows(), m_));
    return z;
  }

  /// Forward data stacked in output order: y0, then per (k, j) the u, f, g columns.
  VectorXcd stack_data(const VectorXcd& y0, const sscontrol::AdaptedField& u, const sscontrol::AdaptedField* f,
                       const sscontrol::AdaptedField& gfield) const {
    VectorXcd d = VectorXcd::Zero(n_out_);
    d.head(m_) = y0;
    for (int k = 0; k < tau_; ++k)
      for (Index j = 0; j < tree_.node_count(k); ++j) {
        const Index r = block(k, j);
        d.segment(r, boundary_rows()) = u.node(k, j);
        if (f) d.segment(r + boundary_rows(), m_) = f->node(k, j);
        d.segment(r + boundary_rows() + m_, m_) = gfield.node(k, j);
      }
    return d;
  }

  /// y(τ) from the transposition identity: W_τ y = Lᴴ W d.
  MatrixXcd forward(const VectorXcd& data) const {
    const VectorXcd y = L_.adjoint() * (w_.cast<cd>().asDiagonal() * data) / datum_weight();
    return y.reshaped(m_, tree_.node_count(tau_));
  }

  /// Λ = W_T⁻¹ Lᴴ W P L with P keeping the Γ0 flux and mapping Z to −Δ_h Z (f rows dropped).
  MatrixXcd gramian(const sscontrol::Gamma0Mask& mask) const {
    const Eigen::MatrixXd negL = -laplacian(g_);
    MatrixXcd P = MatrixXcd::Zero(n_out_, n_out_);
    for (int k = 0; k < tau_; ++k)
      for (Index j = 0; j < tree_.node_count(k); ++j) {
        const Index r = block(k, j);
        for (Index b = 0; b < boundary_rows(); ++b)
          if (mask[static_cast<std::size_t>(b)]) P(r + b, r + b) = 1.0;
        P.block(r + boundary_rows() + m_, r + boundary_rows() + m_, m_, m_) = negL.cast<cd>();
      }
    return L_.adjoint() * w_.cast<cd>().asDiagonal() * P * L_ / datum_weight();
  }

 private:
  const sscontrol::Grid& g_;
  const sscontrol::FiltrationTree& tree_;
  int tau_;
  Index m_;
  Trace tr_;
  std::vector<Index> offsets_;
  Index n_out_ = 0;
  MatrixXcd L_;
  Eigen::VectorXd w_;
};

inline double rel(const MatrixXcd& a, const MatrixXcd& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

}  // namespace oracle
