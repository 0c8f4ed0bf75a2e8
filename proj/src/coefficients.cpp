#include "sscontrol/coefficients.hpp"

#include "sscontrol/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sscontrol {

namespace {

template <class Scalar>
double w1inf_impl(const Grid& grid, const LevelCoefficient<Scalar>& c, bool zero_boundary) {
  double best = 0.0;
  const int m0 = grid.count(0);
  const int m1 = grid.dim() == 2 ? grid.count(1) : 1;
  for (int k = 0; k < c.level_count(); ++k) {
    const auto& lev = c.level(k);
    for (Eigen::Index j = 0; j < lev.cols(); ++j) {
      const auto col = lev.col(j);
      best = std::max(best, col.cwiseAbs().maxCoeff());
      for (int a = 0; a < grid.dim(); ++a) {
        const double h = grid.spacing(a);
        const int ma = grid.count(a);
        const int lines = a == 0 ? m1 : m0;
        for (int l = 0; l < lines; ++l) {
          auto at = [&](int p) { return a == 0 ? grid.index(p, l) : grid.index(l, p); };
          for (int p = 0; p + 1 < ma; ++p) best = std::max(best, std::abs(col[at(p + 1)] - col[at(p)]) / h);
          if (zero_boundary) {
            best = std::max(best, std::abs(col[at(0)]) / h);
            best = std::max(best, std::abs(col[at(ma - 1)]) / h);
          }
        }
      }
    }
  }
  return best;
}

template <class Scalar>
void check_shape(const Grid& grid, const FiltrationTree& tree, const LevelCoefficient<Scalar>& c,
                 const std::string& key) {
  if (c.level_count() != tree.levels())
    throw ConfigError("coefficient " + key + ": expected one entry per level 0..K-1", key);
  for (int k = 0; k < tree.levels(); ++k) {
    const auto& m = c.level(k);
    if (m.rows() != grid.size() || (m.cols() != 1 && m.cols() != tree.node_count(k)))
      throw ConfigError("coefficient " + key + ": bad shape at level " + std::to_string(k), key);
  }
  if (!c.all_finite()) throw ConfigError("coefficient " + key + ": non-finite values", key);
}

}  // namespace

double w1inf_norm(const Grid& grid, const RealCoefficient& c, bool zero_boundary) {
  return w1inf_impl(grid, c, zero_boundary);
}

double w1inf_norm(const Grid& grid, const ComplexCoefficient& c, bool zero_boundary) {
  return w1inf_impl(grid, c, zero_boundary);
}

DualCoefficients DualCoefficients::zero(const Grid& grid, const FiltrationTree& tree) {
  DualCoefficients d;
  for (int a = 0; a < grid.dim(); ++a) d.c1.push_back(RealCoefficient::constant(grid, tree, 0.0));
  d.b2 = ComplexCoefficient::constant(grid, tree, 0.0);
  d.b3 = ComplexCoefficient::constant(grid, tree, 0.0);
  return d;
}

void DualCoefficients::validate(const Grid& grid, const FiltrationTree& tree) const {
  if (static_cast<int>(c1.size()) != grid.dim())
    throw ConfigError("coefficient b1: need one component per axis", "coeff.b1");
  for (const auto& c : c1) check_shape(grid, tree, c, "coeff.b1");
  check_shape(grid, tree, b2, "coeff.b2");
  check_shape(grid, tree, b3, "coeff.b3");
}

bool DualCoefficients::deterministic() const {
  for (const auto& c : c1)
    if (!c.deterministic()) return false;
  return b2.deterministic() && b3.deterministic();
}

double DualCoefficients::r1(const Grid& grid) const {
  double n1 = 0.0;
  for (const auto& c : c1) n1 = std::max(n1, w1inf_norm(grid, c, true));
  const double n2 = w1inf_norm(grid, b2, false);
  const double n3 = w1inf_norm(grid, b3, false);
  return n1 * n1 + n2 * n2 + n3 * n3 + 1.0;
}

ForwardCoefficients ForwardCoefficients::zero(const Grid& grid, const FiltrationTree& tree) {
  ForwardCoefficients f;
  for (int a = 0; a < grid.dim(); ++a) f.ia1.push_back(RealCoefficient::constant(grid, tree, 0.0));
  f.a2 = ComplexCoefficient::constant(grid, tree, 0.0);
  f.a3 = ComplexCoefficient::constant(grid, tree, 0.0);
  return f;
}

ForwardCoefficients ForwardCoefficients::unit_noise(const Grid& grid, const FiltrationTree& tree) {
  auto f = zero(grid, tree);
  f.a3 = ComplexCoefficient::constant(grid, tree, 1.0);
  return f;
}

void ForwardCoefficients::validate(const Grid& grid, const FiltrationTree& tree) const {
  if (static_cast<int>(ia1.size()) != grid.dim())
    throw ConfigError("coefficient a1: need one component per axis", "coeff.a1");
  for (const auto& c : ia1) check_shape(grid, tree, c, "coeff.a1");
  check_shape(grid, tree, a2, "coeff.a2");
  check_shape(grid, tree, a3, "coeff.a3");
}

DualCoefficients ForwardCoefficients::dual(const Grid& grid) const {
  DualCoefficients d;
  const int levels = a2.level_count();
  // b1 = −a1 = i·r, so c1 = −r.
  for (const auto& r : ia1) {
    std::vector<RealCoefficient::Matrix> lv;
    for (int k = 0; k < levels; ++k) lv.push_back(-r.level(k));
    d.c1.push_back(RealCoefficient::from_levels(std::move(lv)));
  }
  // b2 = −div(a1) + a2 = i·div(r) + a2.
  std::vector<ComplexCoefficient::Matrix> b2;
  std::vector<ComplexCoefficient::Matrix> b3;
  for (int k = 0; k < levels; ++k) {
    Eigen::Index cols = a2.level(k).cols();
    for (const auto& r : ia1) cols = std::max(cols, r.level(k).cols());
    ComplexCoefficient::Matrix m(grid.size(), cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      GridFunction v = a2.at(k, j);
      for (int a = 0; a < grid.dim(); ++a) {
        const Eigen::VectorXd ra = ia1[static_cast<std::size_t>(a)].at(k, j);
        v += cd{0.0, 1.0} * grid.centered_difference(a, ra).cast<cd>();
      }
      m.col(j) = v;
    }
    b2.push_back(std::move(m));
    b3.push_back(-a3.level(k));
  }
  d.b2 = ComplexCoefficient::from_levels(std::move(b2));
  d.b3 = ComplexCoefficient::from_levels(std::move(b3));
  return d;
}

double ForwardCoefficients::r2(const Grid& grid) const {
  double n1 = 0.0;
  for (const auto& c : ia1) n1 = std::max(n1, w1inf_norm(grid, c, true));
  const double n2 = w1inf_norm(grid, a2, false);
  const double n3 = w1inf_norm(grid, a3, false);
  return n1 * n1 + n2 * n2 + n3 * n3 + 1.0;
}

bool ForwardCoefficients::is_unit_noise() const {
  for (const auto& r : ia1)
    for (int k = 0; k < r.level_count(); ++k)
      if (!r.level(k).isZero(0.0)) return false;
  for (int k = 0; k < a2.level_count(); ++k) {
    if (!a2.level(k).isZero(0.0)) return false;
    if (!(a3.level(k).array() == cd{1.0, 0.0}).all()) return false;
  }
  return true;
}

}  // namespace sscontrol
