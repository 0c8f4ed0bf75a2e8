#include "sscontrol/control.hpp"

#include "sscontrol/errors.hpp"
#include "sscontrol/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace sscontrol {

namespace {

double expected_hm1(const Grid& grid, const FiltrationTree& tree, const LevelValues& v) {
  return std::sqrt(expected_norm_sq(grid, tree, v, NormKind::Hm1));
}

}  // namespace

Gramian::Gramian(ForwardSolver solver, Channels channels) : solver_(std::move(solver)), channels_(channels) {}

ControlPair Gramian::controls_from(const BackwardSolution& sol) const {
  const auto& grid = solver_.grid();
  const auto& tree = solver_.tree();
  auto c = ControlPair::zero(grid, tree);
  for (int k = 0; k < tree.levels(); ++k) {
    auto& u = c.u.level(k);
    auto& g = c.g.level(k);
    for (Eigen::Index j = 0; j < tree.node_count(k); ++j) {
      if (channels_ == Channels::Both) u.col(j) = solver_.gamma0().restrict(sol.flux.node(k, j));
      g.col(j) = grid.hm1_riesz(sol.Z.node(k, j));
    }
  }
  return c;
}

LevelValues Gramian::apply(const LevelValues& z_final) const {
  const auto sol = solver_.backward().solve(z_final);
  const auto controls = controls_from(sol);
  const GridFunction zero = GridFunction::Zero(solver_.grid().size());
  return solver_.solve(zero, controls).y.level(solver_.tree().levels());
}

double Gramian::observation_energy(const BackwardSolution& sol) const {
  const auto& grid = solver_.grid();
  const auto& tree = solver_.tree();
  double e = 0.0;
  for (int k = 0; k < sol.final_level; ++k) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < tree.node_count(k); ++j) {
      if (channels_ == Channels::Both) acc += grid.boundary_norm_sq(sol.flux.node(k, j), solver_.gamma0());
      acc += grid.norm_sq(sol.Z.node(k, j), NormKind::H10);
    }
    e += sol.dt * tree.probability(k) * acc;
  }
  return e;
}

cd Gramian::pairing(const LevelValues& a, const LevelValues& b) const {
  return expected_inner(solver_.grid(), solver_.tree(), a, b);
}

SynthesisResult synthesize_controls(const Gramian& gramian, const GridFunction& y0, const LevelValues& y1,
                                    const SynthesisOptions& options) {
  if (!(options.tol > 0.0)) throw ConfigError("synthesize_controls: tol must be positive", "control.tol");
  if (options.max_iter < 0) throw ConfigError("synthesize_controls: max_iter must be non-negative", "control.max_iter");
  const auto& grid = gramian.grid();
  const auto& tree = gramian.tree();
  const int K = tree.levels();
  if (y1.rows() != grid.size() || y1.cols() != tree.node_count(K))
    throw std::invalid_argument("synthesize_controls: target must have one column per leaf");

  const auto start = std::chrono::steady_clock::now();
  const auto& solver = gramian.solver();
  const LevelValues y_free = solver.solve(y0, ControlPair::zero(grid, tree)).y.level(K);
  const LevelValues b = y1 - y_free;

  SynthesisResult res;
  res.z_star = LevelValues::Zero(grid.size(), tree.node_count(K));
  const double initial = expected_hm1(grid, tree, b);
  const double y1_norm = expected_hm1(grid, tree, y1);
  const double reference = y1_norm > 0.0 ? y1_norm : initial;
  res.log.initial_hm1_residual = initial;
  res.log.reference_norm = reference;

  auto finish = [&]() {
    const auto sol = solver.backward().solve(res.z_star);
    res.controls = gramian.controls_from(sol);
    res.y_final = solver.solve(y0, res.controls).y.level(K);
    res.relative_residual = reference > 0.0 ? expected_hm1(grid, tree, res.y_final - y1) / reference : 0.0;
    return res;
  };
  if (reference == 0.0 || initial <= options.tol * reference) {
    res.converged = true;
    return finish();
  }

  LevelValues r = b;
  LevelValues p = r;
  double rr = gramian.pairing(r, r).real();
  const double rr0 = rr;
  const GridFunction mean_b = expectation(tree, b);
  double lambda_max = 0.0;
  // L²-CG does not decrease the Hm1 residual monotonically; keep the best iterate.
  LevelValues x = res.z_star;
  double best = initial / reference;

  for (int it = 1; it <= options.max_iter; ++it) {
    const LevelValues q = gramian.apply(p);
    const double pp = gramian.pairing(p, p).real();
    const double pq = gramian.pairing(q, p).real();
    lambda_max = std::max(lambda_max, pq / pp);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * lambda_max * pp;
    if (pq < -floor) throw SolverError("synthesize_controls: CG breakdown, ⟪Λp, p⟫ < 0");
    if (pq <= floor) {
      res.stalled = true;
      break;
    }
    const double alpha = rr / pq;
    x += alpha * p;
    r -= alpha * q;
    const double rr_new = gramian.pairing(r, r).real();

    ConvergenceEntry e;
    e.iteration = it;
    e.hm1_residual = expected_hm1(grid, tree, r);
    e.relative_residual = e.hm1_residual / reference;
    e.pairing_residual = std::sqrt(rr_new / rr0);
    // ⟪Λx, x⟫ = ⟪b − r, x⟫.
    e.energy = -0.5 * gramian.pairing(b + r, x).real();
    e.mean_drift = grid.norm(mean_b - expectation(tree, r), NormKind::Hm1);
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.log.entries.push_back(e);
    res.iterations = it;
    if (e.relative_residual < best) {
      best = e.relative_residual;
      res.z_star = x;
    }
    if (e.relative_residual <= options.tol) {
      res.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return finish();
}

double observability_ratio(const Gramian& gramian, const LevelValues& z_final) {
  const auto& grid = gramian.grid();
  const auto& tree = gramian.tree();
  const double num = expected_norm_sq(grid, tree, z_final, NormKind::H10);
  const auto sol = gramian.solver().backward().solve(z_final);
  const double den = gramian.observation_energy(sol);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

Eigen::MatrixXcd dense_gramian(const Gramian& gramian) {
  const auto& grid = gramian.grid();
  const auto& tree = gramian.tree();
  const Eigen::Index n = grid.size(), leaves = tree.node_count(tree.levels());
  const double scale = std::sqrt(static_cast<double>(leaves) / grid.cell_volume());
  Eigen::MatrixXcd A(n * leaves, n * leaves);
  LevelValues e = LevelValues::Zero(n, leaves);
  for (Eigen::Index c = 0; c < n * leaves; ++c) {
    e(c % n, c / n) = scale;
    const LevelValues col = gramian.apply(e) * scale;
    A.col(c) = col.reshaped() * grid.cell_volume() / static_cast<double>(leaves);
    e(c % n, c / n) = 0.0;
  }
  return A;
}

double gramian_min_eigenvalue(const Gramian& gramian, std::uint64_t seed, int* iterations) {
  const auto& grid = gramian.grid();
  const auto& tree = gramian.tree();
  const int K = tree.levels();
  RandomStream rng(seed, 0x6d696e65ULL);
  LevelValues v = white_noise_level(grid, tree, K, rng);
  v /= std::sqrt(gramian.pairing(v, v).real());

  // Inner CG for Λw = v.
  auto solve = [&](const LevelValues& rhs) {
    LevelValues w = LevelValues::Zero(rhs.rows(), rhs.cols());
    LevelValues r = rhs, p = rhs;
    double rr = gramian.pairing(r, r).real();
    const double stop = 1e-24 * rr;
    for (int it = 0; it < 500 && rr > stop; ++it) {
      const LevelValues q = gramian.apply(p);
      const double pq = gramian.pairing(q, p).real();
      if (!(pq > 0.0)) break;
      const double a = rr / pq;
      w += a * p;
      r -= a * q;
      const double rn = gramian.pairing(r, r).real();
      p = r + (rn / rr) * p;
      rr = rn;
    }
    return w;
  };

  double estimate = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < 30; ++it) {
    LevelValues w = solve(v);
    const double nw = std::sqrt(gramian.pairing(w, w).real());
    if (!(nw > 0.0)) break;
    v = w / nw;
    const double rq = gramian.pairing(gramian.apply(v), v).real();
    const bool done = std::abs(rq - estimate) <= 1e-6 * std::abs(rq);
    estimate = rq;
    if (done) break;
  }
  if (iterations) *iterations = it + 1;
  return estimate;
}

ObservabilityStats observability_stats(const Gramian& gramian, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw ConfigError("observability_stats: need at least one sample", "observability.samples");
  const auto& grid = gramian.grid();
  const auto& tree = gramian.tree();
  ObservabilityStats s;
  for (int i = 0; i < sample_count; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    s.ratios.push_back(observability_ratio(gramian, normalized_white_noise(grid, tree, tree.levels(), rng)));
  }
  s.min_ratio = *std::min_element(s.ratios.begin(), s.ratios.end());
  s.max_ratio = *std::max_element(s.ratios.begin(), s.ratios.end());
  s.min_eigenvalue = gramian_min_eigenvalue(gramian, seed, &s.power_iterations);
  return s;
}

UnreachabilityCertificate unreachability_demo(const Grid& grid, const FiltrationTree& tree, const GridFunction& y0,
                                              const LevelValues& y1, const SynthesisOptions& options) {
  ForwardSolver solver(grid, tree, ForwardCoefficients::unit_noise(grid, tree),
                       Gamma0Mask(std::vector<bool>(static_cast<std::size_t>(grid.boundary_size()), false)));
  const Gramian gramian(std::move(solver), Channels::DiffusionOnly);
  const auto result = synthesize_controls(gramian, y0, y1, options);

  UnreachabilityCertificate c;
  c.lower_bound = mean_obstruction(gramian.solver(), y0, y1);
  c.residuals.push_back(result.log.initial_hm1_residual);
  for (const auto& e : result.log.entries) {
    c.residuals.push_back(e.hm1_residual);
    c.max_mean_drift = std::max(c.max_mean_drift, e.mean_drift);
  }
  c.min_residual = *std::min_element(c.residuals.begin(), c.residuals.end());
  c.final_relative_residual = result.relative_residual;
  c.iterations = result.iterations;
  c.converged = result.converged;
  c.bound_respected = c.min_residual >= c.lower_bound - 1e-10;
  const double scale = std::max(1.0, std::sqrt(expected_norm_sq(grid, tree, y1, NormKind::Hm1)));
  c.unreachable = c.lower_bound > 1e-10 * scale;
  return c;
}

}  // namespace sscontrol
