#include "sscontrol/errors.hpp"
#include "sscontrol/random.hpp"
#include "sscontrol/tree.hpp"

#include <doctest.h>

#include <cmath>

using namespace sscontrol;

TEST_CASE("tree construction") {
  CHECK_THROWS_AS(FiltrationTree::build(1.0, 0), ConfigError);
  CHECK_THROWS_AS(FiltrationTree::build(1.0, 21), ConfigError);
  CHECK_THROWS_AS(FiltrationTree::build(0.0, 3), ConfigError);
  CHECK_THROWS_AS(FiltrationTree::build(std::nan(""), 3), ConfigError);
  try {
    FiltrationTree::build(1.0, 0);
  } catch (const ConfigError& e) {
    CHECK(e.key() == "tree.K");
  }
  const auto t = FiltrationTree::build(2.0, 4);
  CHECK(t.dt() == doctest::Approx(0.5));
  CHECK(t.sqrt_dt() == doctest::Approx(std::sqrt(0.5)));
  CHECK(t.node_count(4) == 16);
  CHECK(t.probability(3) == doctest::Approx(0.125));
  CHECK(t.time(4) == doctest::Approx(2.0));
}

TEST_CASE("paths and branching") {
  const auto t = FiltrationTree::build(1.0, 5);
  CHECK(FiltrationTree::parent(FiltrationTree::child(6, 1)) == 6);
  CHECK(t.path_sum(0, 0) == 0.0);
  // E B(t_k) = 0 and E B(t_k)² = t_k at every level.
  for (int k = 1; k <= 5; ++k) {
    double m1 = 0.0, m2 = 0.0;
    for (Eigen::Index j = 0; j < t.node_count(k); ++j) {
      m1 += t.probability(k) * t.path_sum(k, j);
      m2 += t.probability(k) * t.path_sum(k, j) * t.path_sum(k, j);
      CHECK(t.path_sum(k, j) ==
            doctest::Approx(t.path_sum(k - 1, FiltrationTree::parent(j)) + t.increment(static_cast<int>(j % 2))));
    }
    CHECK(std::abs(m1) < 1e-14);
    CHECK(m2 == doctest::Approx(t.time(k)));
  }
}

TEST_CASE("martingale representation reconstructs the children") {
  RandomStream rng(11, 0);
  const double dt = 0.125;
  Eigen::VectorXcd up(6), down(6);
  for (int i = 0; i < 6; ++i) {
    up[i] = rng.complex_normal();
    down[i] = rng.complex_normal();
  }
  const auto s = martingale_representation(up, down, dt);
  CHECK((s.mean + std::sqrt(dt) * s.integrand - up).norm() < 1e-15);
  CHECK((s.mean - std::sqrt(dt) * s.integrand - down).norm() < 1e-15);
}

TEST_CASE("conditional expectation and tower property") {
  const auto t = FiltrationTree::build(1.0, 4);
  const auto g = Grid::build({{0.0, 1.0}}, {3});
  RandomStream rng(2, 0);
  const auto leaves = white_noise_level(g, t, 4, rng);
  Eigen::MatrixXcd level = leaves;
  for (int k = 4; k > 0; --k) {
    const Eigen::MatrixXcd parent = conditional_expectation(t, level);
    REQUIRE(parent.cols() == t.node_count(k - 1));
    for (Eigen::Index j = 0; j < parent.cols(); ++j)
      CHECK((parent.col(j) - 0.5 * (level.col(2 * j) + level.col(2 * j + 1))).norm() < 1e-15);
    CHECK((expectation(t, parent) - expectation(t, leaves)).norm() < 1e-14);
    level = parent;
  }
  CHECK((level.col(0) - expectation(t, leaves)).norm() < 1e-14);
}

TEST_CASE("expected inner product and norms") {
  const auto t = FiltrationTree::build(1.0, 3);
  const auto g = Grid::build({{0.0, 1.0}}, {4});
  RandomStream rng(4, 0);
  const auto a = white_noise_level(g, t, 3, rng);
  const auto b = white_noise_level(g, t, 3, rng);
  cd ref = 0.0;
  for (Eigen::Index j = 0; j < 8; ++j) ref += t.probability(3) * g.inner(a.col(j), b.col(j));
  CHECK(std::abs(expected_inner(g, t, a, b) - ref) < 1e-14);
  CHECK(std::abs(expected_inner(g, t, a, b) - std::conj(expected_inner(g, t, b, a))) < 1e-14);
  CHECK(expected_norm_sq(g, t, a, NormKind::L2) == doctest::Approx(expected_inner(g, t, a, a).real()));
}

TEST_CASE("adapted field arithmetic") {
  const auto t = FiltrationTree::build(1.0, 3);
  AdaptedField f(t, 2, 0, 2);
  CHECK(f.is_zero());
  CHECK(f.has_level(2));
  CHECK_FALSE(f.has_level(3));
  f.node(1, 1).setConstant(cd(1.0, 2.0));
  AdaptedField h = f;
  h += f;
  h *= cd(0.5);
  CHECK((h.level(1) - f.level(1)).norm() == 0.0);
  CHECK(f.all_finite());
  f.node(2, 3)[0] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(f.all_finite());
}

TEST_CASE("random streams are keyed, not ordered") {
  RandomStream a(9, 3), b(9, 3), c(9, 4);
  RandomStream other(9, 5);
  (void)other.normal();
  const double x = a.normal();
  CHECK(x == b.normal());
  CHECK(x != c.normal());
  // E|ξ|² = 1 for the complex normal.
  RandomStream d(1, 1);
  double s = 0.0;
  for (int i = 0; i < 20000; ++i) s += std::norm(d.complex_normal());
  CHECK(s / 20000 == doctest::Approx(1.0).epsilon(0.03));
}
