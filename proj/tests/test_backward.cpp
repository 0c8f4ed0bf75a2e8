#include "dense_oracle.hpp"

#include "sscontrol/backward.hpp"
#include "sscontrol/errors.hpp"
#include "sscontrol/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sscontrol;

namespace {

struct Instance {
  Grid grid;
  FiltrationTree tree;
  DualCoefficients coef;
};

Instance small(int m, int K, std::uint64_t seed, bool two_d = false, bool adapted = true) {
  Grid g = two_d ? Grid::build({{0.0, 1.0}, {0.0, 1.0}}, {m, m}) : Grid::build({{0.0, 1.0}}, {m});
  auto t = FiltrationTree::build(1.0, K);
  RandomStream rng(seed, 0x636f6566);
  auto c = random_dual_coefficients(g, t, rng, 0.7, adapted);
  return {g, t, c};
}

}  // namespace

TEST_CASE("step matrix matches the dense assembly") {
  const auto in = small(4, 3, 1, true);
  const ImplicitStep step(in.grid, in.tree, in.coef);
  for (int k = 0; k < 3; ++k)
    for (Eigen::Index j = 0; j < in.tree.node_count(k); ++j)
      CHECK(oracle::rel(step.matrix(k, j), oracle::step_matrix(in.grid, in.tree, in.coef, k, j)) < 1e-15);
}

TEST_CASE("recursive backward solve equals the global dense system") {
  for (int m = 2; m <= 4; ++m)
    for (int K = 1; K <= 3; ++K)
      for (bool two_d : {false, true}) {
        if (two_d && m > 3) continue;
        const auto in = small(m, K, 10 * m + K, two_d);
        const BackwardSolver solver(in.grid, in.tree, in.coef);
        RandomStream rng(m, K);
        const auto datum = white_noise_level(in.grid, in.tree, K, rng);
        const auto sol = solver.solve(datum);
        const oracle::BackwardMap ref(in.grid, in.tree, in.coef, K);
        const Eigen::VectorXcd out = ref.outputs() * datum.reshaped();
        CAPTURE(m);
        CAPTURE(K);
        CHECK(oracle::rel(sol.z.level(0), out.head(in.grid.size())) < 1e-12);
        for (int k = 0; k < K; ++k)
          for (Eigen::Index j = 0; j < in.tree.node_count(k); ++j) {
            const auto r = ref.block(k, j);
            const auto nb = ref.boundary_rows();
            const auto n = in.grid.size();
            CHECK(oracle::rel(sol.flux.node(k, j), out.segment(r, nb)) < 1e-12);
            CHECK(oracle::rel(sol.z.node(k, j), out.segment(r + nb, n)) < 1e-12);
            CHECK(oracle::rel(sol.Z.node(k, j), out.segment(r + nb + n, n)) < 1e-12);
          }
      }
}

TEST_CASE("solving from an intermediate level") {
  const auto in = small(5, 4, 3);
  const BackwardSolver solver(in.grid, in.tree, in.coef);
  RandomStream rng(1, 2);
  const auto datum = white_noise_level(in.grid, in.tree, 2, rng);
  const auto sol = solver.solve(datum, 2);
  CHECK(sol.final_level == 2);
  const oracle::BackwardMap ref(in.grid, in.tree, in.coef, 2);
  CHECK(oracle::rel(sol.z.level(0), ref.z_level(datum, 0)) < 1e-12);
  CHECK(oracle::rel(sol.z.level(1), ref.z_level(datum, 1)) < 1e-12);
  CHECK_THROWS(solver.solve(white_noise_level(in.grid, in.tree, 3, rng), 2));
}

TEST_CASE("linearity") {
  const auto in = small(6, 4, 4);
  const BackwardSolver solver(in.grid, in.tree, in.coef);
  RandomStream rng(8, 0);
  const auto a = white_noise_level(in.grid, in.tree, 4, rng);
  const auto b = white_noise_level(in.grid, in.tree, 4, rng);
  const cd alpha(0.3, -1.2), beta(-2.0, 0.5);
  const auto sa = solver.solve(a), sb = solver.solve(b), sc = solver.solve(alpha * a + beta * b);
  for (int k = 0; k < 4; ++k) {
    CHECK(oracle::rel(sc.z.level(k), alpha * sa.z.level(k) + beta * sb.z.level(k)) < 1e-13);
    CHECK(oracle::rel(sc.Z.level(k), alpha * sa.Z.level(k) + beta * sb.Z.level(k)) < 1e-13);
  }
}

TEST_CASE("adaptedness: a node only sees its own subtree") {
  const auto in = small(5, 4, 5);
  const BackwardSolver solver(in.grid, in.tree, in.coef);
  RandomStream rng(6, 0);
  const auto a = white_noise_level(in.grid, in.tree, 4, rng);
  auto b = a;
  // Change the leaves below node 0 of level 1 only (leaves 0..7).
  b.leftCols(8) += white_noise_level(in.grid, in.tree, 4, rng).leftCols(8);
  const auto sa = solver.solve(a), sb = solver.solve(b);
  for (int k = 1; k <= 3; ++k) {
    const auto half = in.tree.node_count(k) / 2;
    CHECK((sa.z.level(k).rightCols(half) - sb.z.level(k).rightCols(half)).norm() == 0.0);
    CHECK((sa.Z.level(k).rightCols(half) - sb.Z.level(k).rightCols(half)).norm() == 0.0);
    CHECK((sa.z.level(k).leftCols(half) - sb.z.level(k).leftCols(half)).norm() > 0.0);
  }
}

TEST_CASE("zero coefficients: eigenvector recursion") {
  const auto g = Grid::build({{0.0, 1.0}}, {11});
  const auto t = FiltrationTree::build(0.5, 5);
  const BackwardSolver solver(g, t, DualCoefficients::zero(g, t));
  const double h = g.spacing(0);
  for (int q : {1, 4}) {
    const GridFunction e = g.sample([&](const Point& x) { return cd(std::sin(q * std::numbers::pi * x[0])); });
    const double mu = 4.0 / (h * h) * std::pow(std::sin(q * std::numbers::pi * h / 2), 2);
    const LevelValues datum = e.replicate(1, t.node_count(5));
    const auto sol = solver.solve(datum);
    // M = −i − Δtμ on e, Z = 0: z_k = z_{k+1} / (1 − iΔtμ).
    const cd factor = 1.0 / cd(1.0, -t.dt() * mu);
    CHECK(oracle::rel(sol.z.node(4, 0), factor * e) < 1e-13);
    for (int k = 4; k >= 0; --k) {
      // Round-off in slower-decaying low modes grows relative to mode q.
      CHECK(oracle::rel(sol.z.node(k, 0), factor * sol.z.node(k + 1, 0)) < 1e-10);
      CHECK(sol.Z.level(k).norm() < 1e-12);
    }
  }
}

TEST_CASE("energy estimate: zero coefficients give C = 0") {
  const auto g = Grid::build({{0.0, 1.0}}, {15});
  const auto t = FiltrationTree::build(1.0, 6);
  const BackwardSolver solver(g, t, DualCoefficients::zero(g, t));
  for (std::uint64_t s = 0; s < 5; ++s) {
    RandomStream rng(s, 7);
    const auto sol = solver.solve(white_noise_level(g, t, 6, rng));
    const auto prof = energy_profile(g, t, sol);
    CHECK(prof.c_hat == 0.0);
    CHECK_FALSE(prof.vacuous);
    // Implicit Euler: E|z_k|² + Σ Δt E|Z|² below E|z_{k+1}|² per step, in H¹₀.
    for (int k = 0; k < 6; ++k) CHECK(prof.h10_sq[static_cast<std::size_t>(k)] <= prof.h10_sq[static_cast<std::size_t>(k + 1)] * (1 + 1e-12));
  }
}

TEST_CASE("energy estimate: random coefficients give a finite constant") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto in = small(15, 6, s);
    const BackwardSolver solver(in.grid, in.tree, in.coef);
    RandomStream rng(s, 8);
    const auto sol = solver.solve(normalized_white_noise(in.grid, in.tree, 6, rng));
    const auto prof = energy_profile(in.grid, in.tree, sol);
    CHECK(std::isfinite(prof.c_hat));
    CHECK(prof.c_hat >= 0.0);
    CHECK(hidden_regularity_ratio(in.grid, in.tree, sol) > 0.0);
  }
}

TEST_CASE("energy profile of zero data is vacuous") {
  const auto in = small(5, 3, 1);
  const BackwardSolver solver(in.grid, in.tree, in.coef);
  const auto sol = solver.solve(LevelValues::Zero(5, 8));
  CHECK(energy_profile(in.grid, in.tree, sol).vacuous);
  CHECK(hidden_regularity_ratio(in.grid, in.tree, sol) == 0.0);
}

TEST_CASE("invalid input") {
  const auto in = small(4, 2, 1);
  const BackwardSolver solver(in.grid, in.tree, in.coef);
  LevelValues bad = LevelValues::Zero(4, 4);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(solver.solve(bad), SolverError);
  CHECK_THROWS(solver.solve(LevelValues::Zero(3, 4)));
  auto c = in.coef;
  c.b2 = ComplexCoefficient::constant(in.grid, FiltrationTree::build(1.0, 3), cd(1.0));
  CHECK_THROWS_AS(BackwardSolver(in.grid, in.tree, c), ConfigError);
}
