#include "sscontrol/forward.hpp"

#include "sscontrol/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sscontrol {

ControlPair ControlPair::zero(const Grid& grid, const FiltrationTree& tree) {
  return {AdaptedField(tree, grid.boundary_size(), 0, tree.levels() - 1),
          AdaptedField(tree, grid.size(), 0, tree.levels() - 1)};
}

ForwardSolver::ForwardSolver(const Grid& grid, const FiltrationTree& tree, const ForwardCoefficients& coefficients,
                             Gamma0Mask gamma0)
    : backward_(grid, tree, (coefficients.validate(grid, tree), coefficients.dual(grid))),
      gamma0_(std::move(gamma0)),
      forward_(coefficients) {
  if (gamma0_.size() != static_cast<std::size_t>(grid.boundary_size()))
    throw ConfigError("forward: Γ0 mask does not match the grid boundary");
}

ForwardSolver::ForwardSolver(const Grid& grid, const FiltrationTree& tree, const DualCoefficients& dual,
                             Gamma0Mask gamma0)
    : backward_(grid, tree, dual), gamma0_(std::move(gamma0)) {
  if (gamma0_.size() != static_cast<std::size_t>(grid.boundary_size()))
    throw ConfigError("forward: Γ0 mask does not match the grid boundary");
}

void ForwardSolver::check_controls(const ControlPair& controls, const AdaptedField* source) const {
  const auto& grid = backward_.grid();
  const int K = backward_.tree().levels();
  auto check = [&](const AdaptedField& f, Eigen::Index rows, const char* name) {
    if (f.rows() != rows || f.first_level() != 0 || f.last_level() != K - 1)
      throw std::invalid_argument(std::string("solve_forward: ") + name + " must live on levels 0..K-1");
    if (!f.all_finite()) throw SolverError(std::string("forward: non-finite ") + name);
  };
  check(controls.u, grid.boundary_size(), "u");
  check(controls.g, grid.size(), "g");
  if (source) check(*source, grid.size(), "f");
  for (int k = 0; k < K; ++k) {
    const auto& uk = controls.u.level(k);
    for (std::size_t b = 0; b < gamma0_.size(); ++b)
      if (!gamma0_[b] && !uk.row(static_cast<Eigen::Index>(b)).isZero(0.0))
        throw std::invalid_argument("solve_forward: boundary control u must vanish off Γ0");
  }
}

ForwardState ForwardSolver::solve(const GridFunction& y0, const ControlPair& controls,
                                  const AdaptedField* source) const {
  const auto& grid = backward_.grid();
  const auto& tree = backward_.tree();
  const auto& step = backward_.step();
  if (y0.size() != grid.size()) throw std::invalid_argument("solve_forward: y0 size mismatch");
  if (!y0.allFinite()) throw SolverError("forward: non-finite y0", 0);
  check_controls(controls, source);

  const int K = tree.levels();
  const double dt = tree.dt();
  const double inv_sqrt_dt = 1.0 / tree.sqrt_dt();
  const cd I{0.0, 1.0};

  ForwardState st{AdaptedField(tree, grid.size(), 0, K)};
  st.y.level(0).col(0) = y0;
  for (int k = 0; k < K; ++k) {
    const auto& yk = st.y.level(k);
    auto& next = st.y.level(k + 1);
    for (Eigen::Index j = 0; j < tree.node_count(k); ++j) {
      // Transpose of: ẑ, Z from the children; z_k = M⁻¹(−iẑ + Δt·b3·Z).
      GridFunction alpha = yk.col(j) + dt * grid.normal_trace_adjoint(controls.u.node(k, j));
      if (source) alpha += dt * source->node(k, j);
      const GridFunction gamma = step.solve_adjoint(k, j, alpha);
      const GridFunction beta = dt * controls.g.node(k, j) + dt * step.b3(k, j).conjugate().cwiseProduct(gamma);
      next.col(2 * j) = I * gamma + inv_sqrt_dt * beta;
      next.col(2 * j + 1) = I * gamma - inv_sqrt_dt * beta;
    }
  }
  return st;
}

GridFunction ForwardSolver::semigroup_step(int k, const GridFunction& y) const {
  const auto& c = backward_.step().coefficients();
  for (const auto& c1 : c.c1)
    if (!c1.deterministic_at(k)) throw ConfigError("semigroup_step: coefficients are not deterministic");
  if (!c.b2.deterministic_at(k)) throw ConfigError("semigroup_step: coefficients are not deterministic");
  return cd{0.0, 1.0} * backward_.step().solve_adjoint(k, 0, y);
}

DualityTerms duality_gap(const ForwardSolver& solver, const ForwardState& state, const GridFunction& y0,
                         const ControlPair& controls, const AdaptedField* source, const LevelValues& z_tau,
                         int level) {
  const auto& grid = solver.grid();
  const auto& tree = solver.tree();
  const int tau = level < 0 ? tree.levels() : level;
  const auto sol = solver.backward().solve(z_tau, tau);

  DualityTerms t;
  t.lhs_final = expected_inner(grid, tree, state.y.level(tau), z_tau);
  t.lhs_initial = grid.inner(y0, sol.z.level(0).col(0));
  const double dt = tree.dt();
  for (int k = 0; k < tau; ++k) {
    const auto n = tree.node_count(k);
    cd b = 0.0, s = 0.0, d = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      b += grid.boundary_inner(solver.gamma0().restrict(controls.u.node(k, j)), sol.flux.node(k, j));
      if (source) s += grid.inner(source->node(k, j), sol.z.node(k, j));
      d += grid.inner(controls.g.node(k, j), sol.Z.node(k, j));
    }
    const double p = tree.probability(k);
    t.boundary += dt * p * b;
    t.source += dt * p * s;
    t.diffusion += dt * p * d;
  }
  const cd lhs = t.lhs_final - t.lhs_initial;
  const cd rhs = t.boundary + t.source + t.diffusion;
  const double scale = std::abs(t.lhs_final) + std::abs(t.lhs_initial) + std::abs(t.boundary) +
                       std::abs(t.source) + std::abs(t.diffusion);
  t.gap = scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
  return t;
}

GridFunction semigroup(const ForwardSolver& solver, const GridFunction& y) {
  GridFunction out = y;
  for (int k = 0; k < solver.tree().levels(); ++k) out = solver.semigroup_step(k, out);
  return out;
}

MeanEvolution mean_evolution_check(const ForwardSolver& solver, const GridFunction& y0, const ControlPair& controls,
                                   const AdaptedField* source) {
  const auto& fc = solver.forward_coefficients();
  if (!fc || !fc->is_unit_noise())
    throw ConfigError("mean_evolution_check: requires a1 = a2 = 0 and a3 = 1", "coeff");
  if (!controls.u.is_zero()) throw ConfigError("mean_evolution_check: requires u = 0", "control.u");
  if (source && !source->is_zero()) throw ConfigError("mean_evolution_check: requires f = 0", "coeff.f");

  const auto state = solver.solve(y0, controls, source);
  MeanEvolution m;
  m.mean_final = expectation(solver.tree(), state.y.level(solver.tree().levels()));
  m.semigroup_image = semigroup(solver, y0);
  m.discrepancy = solver.grid().norm(m.mean_final - m.semigroup_image, NormKind::Hm1);
  return m;
}

MeanEvolution mean_evolution_check(const Grid& grid, const FiltrationTree& tree, const GridFunction& y0,
                                   const AdaptedField& g) {
  // Γ0 plays no role with u = 0; an empty-support mask keeps the solver shapes consistent.
  ForwardSolver solver(grid, tree, ForwardCoefficients::unit_noise(grid, tree),
                       Gamma0Mask(std::vector<bool>(static_cast<std::size_t>(grid.boundary_size()), false)));
  auto controls = ControlPair::zero(grid, tree);
  controls.g = g;
  return mean_evolution_check(solver, y0, controls);
}

double mean_obstruction(const ForwardSolver& solver, const GridFunction& y0, const LevelValues& y1) {
  const auto& tree = solver.tree();
  const GridFunction mean_target = expectation(tree, y1);
  return solver.grid().norm(mean_target - semigroup(solver, y0), NormKind::Hm1);
}

WellPosedness wellposedness_constants(const ForwardSolver& solver, const ForwardState& state, const GridFunction& y0,
                                      const ControlPair& controls, const AdaptedField* source) {
  const auto& grid = solver.grid();
  const auto& tree = solver.tree();
  const double dt = tree.dt();
  WellPosedness w;
  for (int k = 0; k <= tree.levels(); ++k)
    w.max_state = std::max(w.max_state, std::sqrt(expected_norm_sq(grid, tree, state.y.level(k), NormKind::Hm1)));

  double f2 = 0.0, u2 = 0.0, g2 = 0.0;
  for (int k = 0; k < tree.levels(); ++k) {
    const double p = tree.probability(k);
    for (Eigen::Index j = 0; j < tree.node_count(k); ++j) {
      if (source) f2 += dt * p * grid.norm_sq(source->node(k, j), NormKind::L2);
      u2 += dt * p * grid.boundary_norm_sq(controls.u.node(k, j), solver.gamma0());
      g2 += dt * p * grid.norm_sq(controls.g.node(k, j), NormKind::Hm1);
    }
  }
  w.data = grid.norm(y0, NormKind::Hm1) + std::sqrt(f2) + std::sqrt(u2) + std::sqrt(g2);
  w.r1 = solver.backward().r1();
  w.r2 = solver.forward_coefficients() ? solver.forward_coefficients()->r2(grid) : w.r1;
  if (w.data > 0.0 && w.max_state > w.data) {
    const double l = std::log(w.max_state / w.data);
    w.c_hat_r1 = l / w.r1;
    w.c_hat_r2 = l / w.r2;
  }
  return w;
}

}  // namespace sscontrol
