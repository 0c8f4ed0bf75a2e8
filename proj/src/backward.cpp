#include "sscontrol/backward.hpp"

#include "sscontrol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sscontrol {

namespace {

constexpr double kMinRcond = 1e-14;
constexpr std::size_t kCacheBudgetBytes = std::size_t{512} << 20;

bool same_level(const DualCoefficients& c, int k, int prev) {
  auto eq = [&](const auto& coef) { return coef.level(k) == coef.level(prev); };
  for (const auto& c1 : c.c1)
    if (!eq(c1)) return false;
  return eq(c.b2) && eq(c.b3);
}

bool deterministic_level(const DualCoefficients& c, int k) {
  for (const auto& c1 : c.c1)
    if (!c1.deterministic_at(k)) return false;
  return c.b2.deterministic_at(k) && c.b3.deterministic_at(k);
}

}  // namespace

ImplicitStep::ImplicitStep(const Grid& grid, const FiltrationTree& tree, DualCoefficients coefficients)
    : grid_(grid), tree_(tree), coef_(std::move(coefficients)) {
  coef_.validate(grid_, tree_);
  const auto n = static_cast<std::size_t>(grid_.size());
  const std::size_t per_factor = n * n * sizeof(cd) + n * sizeof(int);
  std::size_t needed = 0;
  for (int k = 0; k < tree_.levels(); ++k)
    needed += per_factor * (deterministic_level(coef_, k) ? 1 : static_cast<std::size_t>(tree_.node_count(k)));
  const bool cache_adapted = needed <= kCacheBudgetBytes;

  cache_.resize(static_cast<std::size_t>(tree_.levels()));
  for (int k = 0; k < tree_.levels(); ++k) {
    auto& slot = cache_[static_cast<std::size_t>(k)];
    if (deterministic_level(coef_, k)) {
      if (k > 0 && deterministic_level(coef_, k - 1) && same_level(coef_, k, k - 1))
        slot.push_back(cache_[static_cast<std::size_t>(k - 1)].front());
      else
        slot.push_back(make_factor(k, 0));
    } else if (cache_adapted) {
      for (Eigen::Index j = 0; j < tree_.node_count(k); ++j) slot.push_back(make_factor(k, j));
    }
  }
}

Eigen::MatrixXcd ImplicitStep::matrix(int k, Eigen::Index node) const {
  const double dt = tree_.dt();
  const cd I{0.0, 1.0};
  Eigen::MatrixXcd m = dt * Eigen::MatrixXd(grid_.laplacian_matrix()).cast<cd>();
  m.diagonal().array() -= I;
  // −Δt·b1·∇ with b1 = −i·c1 gives +iΔt·diag(c1)·D.
  for (int a = 0; a < grid_.dim(); ++a) {
    const Eigen::VectorXd c1 = coef_.c1[static_cast<std::size_t>(a)].at(k, node);
    const Eigen::MatrixXd d = Eigen::MatrixXd(grid_.centered_difference_matrix(a));
    m += (I * dt) * (c1.asDiagonal() * d).cast<cd>();
  }
  m.diagonal() -= dt * coef_.b2.at(k, node);
  return m;
}

std::shared_ptr<const ImplicitStep::Factor> ImplicitStep::make_factor(int k, Eigen::Index node) const {
  auto f = std::make_shared<Factor>(matrix(k, node));
  const double rc = f->rcond();
  if (!(rc > kMinRcond)) {
    std::ostringstream os;
    os << "backward: implicit matrix singular at level " << k << " node " << node << " (rcond " << rc << ")";
    throw SolverError(os.str(), k);
  }
  return f;
}

std::shared_ptr<const ImplicitStep::Factor> ImplicitStep::factor(int k, Eigen::Index node) const {
  const auto& slot = cache_.at(static_cast<std::size_t>(k));
  if (slot.size() == 1) return slot.front();
  if (!slot.empty()) return slot[static_cast<std::size_t>(node)];
  return make_factor(k, node);
}

GridFunction ImplicitStep::solve(int k, Eigen::Index node, const GridFunction& rhs) const {
  if (!rhs.allFinite()) throw SolverError("backward: non-finite right-hand side", k);
  return factor(k, node)->solve(rhs);
}

GridFunction ImplicitStep::solve_adjoint(int k, Eigen::Index node, const GridFunction& rhs) const {
  if (!rhs.allFinite()) throw SolverError("forward: non-finite right-hand side", k);
  return factor(k, node)->adjoint().solve(rhs);
}

BackwardSolver::BackwardSolver(const Grid& grid, const FiltrationTree& tree, const DualCoefficients& coefficients)
    : step_(grid, tree, coefficients), r1_(coefficients.r1(grid)) {}

BackwardSolution BackwardSolver::solve(const LevelValues& final_datum, int final_level) const {
  const auto& tree = step_.tree();
  const auto& grid = step_.grid();
  const int kf = final_level < 0 ? tree.levels() : final_level;
  if (kf < 1 || kf > tree.levels()) throw std::invalid_argument("solve_backward: final level out of range");
  if (final_datum.rows() != grid.size() || final_datum.cols() != tree.node_count(kf))
    throw std::invalid_argument("solve_backward: final datum must have one grid column per node of the final level");
  if (!final_datum.allFinite()) throw SolverError("backward: non-finite final datum", kf);

  BackwardSolution sol;
  sol.final_level = kf;
  sol.dt = tree.dt();
  sol.r1 = r1_;
  sol.z = AdaptedField(tree, grid.size(), 0, kf);
  sol.Z = AdaptedField(tree, grid.size(), 0, kf - 1);
  sol.flux = AdaptedField(tree, grid.boundary_size(), 0, kf);
  sol.z.level(kf) = final_datum;

  const double dt = tree.dt();
  const cd I{0.0, 1.0};
  for (int k = kf - 1; k >= 0; --k) {
    const auto& next = sol.z.level(k + 1);
    auto& cur = sol.z.level(k);
    auto& Zk = sol.Z.level(k);
    for (Eigen::Index j = 0; j < tree.node_count(k); ++j) {
      const auto split = martingale_representation(next.col(2 * j), next.col(2 * j + 1), dt);
      Zk.col(j) = split.integrand;
      const GridFunction rhs = -I * split.mean + dt * step_.b3(k, j).cwiseProduct(split.integrand);
      cur.col(j) = step_.solve(k, j, rhs);
    }
  }
  for (int k = 0; k <= kf; ++k) {
    const auto& zk = sol.z.level(k);
    auto& fk = sol.flux.level(k);
    for (Eigen::Index j = 0; j < zk.cols(); ++j) fk.col(j) = grid.normal_trace(zk.col(j));
  }
  return sol;
}

EnergyProfile energy_profile(const Grid& grid, const FiltrationTree& tree, const BackwardSolution& sol) {
  EnergyProfile p;
  const int kf = sol.final_level;
  for (int k = 0; k <= kf; ++k) p.h10_sq.push_back(expected_norm_sq(grid, tree, sol.z.level(k), NormKind::H10));
  for (int k = 0; k < kf; ++k) p.z_energy += sol.dt * expected_norm_sq(grid, tree, sol.Z.level(k), NormKind::H10);

  const bool all_zero =
      p.z_energy == 0.0 && std::all_of(p.h10_sq.begin(), p.h10_sq.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    p.vacuous = true;
    return p;
  }
  double worst = 0.0;  // max log ratio
  for (int k = 0; k <= kf; ++k) {
    for (int j = k; j <= kf; ++j) {
      const double denom = p.h10_sq[static_cast<std::size_t>(j)] + p.z_energy;
      const double num = p.h10_sq[static_cast<std::size_t>(k)];
      if (num == 0.0) continue;
      if (denom == 0.0) {
        worst = std::numeric_limits<double>::infinity();
        continue;
      }
      worst = std::max(worst, std::log(num / denom));
    }
  }
  p.c_hat = worst / sol.r1;
  return p;
}

double hidden_regularity_ratio(const Grid& grid, const FiltrationTree& tree, const BackwardSolution& sol) {
  const int kf = sol.final_level;
  const double datum = expected_norm_sq(grid, tree, sol.z.level(kf), NormKind::H10);
  if (datum == 0.0) return 0.0;
  double flux = 0.0;
  for (int k = 0; k < kf; ++k) {
    const auto& fk = sol.flux.level(k);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < fk.cols(); ++j) acc += grid.boundary_norm_sq(fk.col(j));
    flux += sol.dt * acc / static_cast<double>(fk.cols());
  }
  return std::sqrt(flux / datum);
}

}  // namespace sscontrol
