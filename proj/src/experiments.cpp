#include "sscontrol/experiments.hpp"

#include "sscontrol/carleman.hpp"
#include "sscontrol/control.hpp"
#include "sscontrol/errors.hpp"
#include "sscontrol/forward.hpp"
#include "sscontrol/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace sscontrol {

namespace {

// Stream ids keep every random draw independent of the others.
enum : std::uint64_t {
  kDualityStream = 100,
  kObservabilityStream = 200,
  kTargetStream = 300,
  kCarlemanStream = 400,
  kFunctionalStream = 500,
  kNoncontrolStream = 600,
};

AdaptedField boundary_noise(const Grid& grid, const FiltrationTree& tree, const Gamma0Mask& mask,
                            RandomStream& rng) {
  auto u = white_noise_field(tree, grid.boundary_size(), 0, tree.levels() - 1, rng);
  for (int k = 0; k < tree.levels(); ++k)
    for (std::size_t b = 0; b < mask.size(); ++b)
      if (!mask[b]) u.level(k).row(static_cast<Eigen::Index>(b)).setZero();
  return u;
}

double slope(const std::vector<double>& h, const std::vector<double>& err) {
  // Least-squares slope of log err against log h.
  const auto n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<Point> verification_points(const Grid& grid) {
  std::vector<Point> pts;
  for (Eigen::Index i = 0; i < grid.size(); ++i) pts.push_back(grid.node(i));
  for (const auto& f : grid.boundary_nodes()) pts.push_back(f.x);
  if (grid.dim() == 1) return pts;
  // 2D corners are not face nodes.
  for (double a : {grid.lower(0), grid.upper(0)})
    for (double b : {grid.lower(1), grid.upper(1)}) pts.push_back({a, b});
  return pts;
}

std::vector<double> interior_times(double T, int n) {
  std::vector<double> t;
  for (int i = 1; i <= n; ++i) t.push_back(T * i / (n + 1));
  return t;
}

void echo_config(Report& r, const ExperimentConfig& cfg) {
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [k, v] : cfg.echo()) c[k] = v;
  r.summary["config"] = c;
}

// ---------------------------------------------------------------------------

void run_duality(Report& r, const ExperimentConfig& cfg) {
  const Grid grid = cfg.make_grid();
  const FiltrationTree tree = cfg.make_tree();
  const ForwardSolver solver(grid, tree, cfg.make_coefficients(grid, tree), grid.gamma0_mask(cfg.x0));
  const int K = tree.levels();

  Table t{"duality.csv", {"sample", "tau", "gap", "lhs_final", "lhs_initial", "boundary", "source", "diffusion"}, {}};
  double max_gap = 0.0, c_r1 = 0.0, c_r2 = 0.0;
  for (int i = 0; i < cfg.duality_samples; ++i) {
    RandomStream rng(cfg.seed, kDualityStream + static_cast<std::uint64_t>(i));
    ControlPair c{boundary_noise(grid, tree, solver.gamma0(), rng),
                  white_noise_field(tree, grid.size(), 0, K - 1, rng)};
    const AdaptedField f = white_noise_field(tree, grid.size(), 0, K - 1, rng);
    const GridFunction y0 = random_grid_function(grid, rng);
    const auto state = solver.solve(y0, c, &f);
    const int tau = K - (i % K);
    const auto terms = duality_gap(solver, state, y0, c, &f, white_noise_level(grid, tree, tau, rng), tau);
    max_gap = std::max(max_gap, terms.gap);
    const auto w = wellposedness_constants(solver, state, y0, c, &f);
    c_r1 = std::max(c_r1, w.c_hat_r1);
    c_r2 = std::max(c_r2, w.c_hat_r2);
    t.rows.push_back({double(i), double(tau), terms.gap, std::abs(terms.lhs_final), std::abs(terms.lhs_initial),
                      std::abs(terms.boundary), std::abs(terms.source), std::abs(terms.diffusion)});
  }
  r.tables.push_back(std::move(t));
  r.scalar("max_gap", max_gap, "max over samples of |lhs − rhs| / Σ|terms| in the transposition identity");
  r.scalar("r1", solver.backward().r1(), "|b1|²+|b2|²+|b3|² (discrete W1,∞) + 1");
  const auto& fc = solver.forward_coefficients();
  r.scalar("r2", fc ? fc->r2(grid) : solver.backward().r1(), "|a1|²+|a2|²+|a3|² (discrete W1,∞) + 1");
  r.scalar("wellposedness_c_hat_r1", c_r1, "max_k |y(t_k)|_{E,Hm1} ≤ exp(Ĉ·r1)·data, largest Ĉ over samples");
  r.scalar("wellposedness_c_hat_r2", c_r2, "same bound against r2");
  r.check("duality_gap", max_gap <= 1e-11);
}

std::vector<double> sample_ratios(const Gramian& g, int samples, std::uint64_t seed) {
  std::vector<double> out;
  for (int i = 0; i < samples; ++i) {
    RandomStream rng(seed, kObservabilityStream + static_cast<std::uint64_t>(i));
    out.push_back(observability_ratio(g, normalized_white_noise(g.grid(), g.tree(), g.tree().levels(), rng)));
  }
  return out;
}

void run_observability(Report& r, const ExperimentConfig& cfg) {
  const Grid grid = cfg.make_grid();
  const FiltrationTree tree = cfg.make_tree();
  const auto mask = grid.gamma0_mask(cfg.x0);
  const Gramian gram(ForwardSolver(grid, tree, cfg.make_coefficients(grid, tree), mask));

  const auto ratios = sample_ratios(gram, cfg.observability_samples, cfg.seed);
  const double max_ratio = *std::max_element(ratios.begin(), ratios.end());
  const double min_ratio = *std::min_element(ratios.begin(), ratios.end());
  // Dense eigen-decomposition when affordable, inverse iteration otherwise.
  int power_iterations = 0;
  double min_eig = 0.0, max_eig = 0.0;
  const bool dense = grid.size() * tree.node_count(tree.levels()) <= 1024;
  if (dense) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_gramian(gram), Eigen::EigenvaluesOnly);
    min_eig = es.eigenvalues().minCoeff();
    max_eig = es.eigenvalues().maxCoeff();
  } else {
    min_eig = gramian_min_eigenvalue(gram, cfg.seed, &power_iterations);
  }

  std::vector<double> refined;
  if (cfg.observability_refine) {
    const FiltrationTree fine = cfg.make_tree(2 * cfg.levels);
    const Gramian gf(ForwardSolver(grid, fine, cfg.make_coefficients(grid, fine), mask));
    refined = sample_ratios(gf, cfg.observability_samples, cfg.seed);
  }

  Table t{"observability_ratios.csv", {"sample", "ratio"}, {}};
  if (!refined.empty()) t.header.push_back("ratio_refined");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    t.rows.push_back({double(i), ratios[i]});
    if (!refined.empty()) t.rows.back().push_back(refined[i]);
  }
  r.tables.push_back(std::move(t));

  // Energy profile and hidden regularity on the same samples.
  Table e{"energy.csv", {"sample", "c_hat", "hidden_regularity_ratio"}, {}};
  double max_c = 0.0, max_hidden = 0.0;
  bool finite = true;
  for (int i = 0; i < cfg.observability_samples; ++i) {
    RandomStream rng(cfg.seed, kObservabilityStream + static_cast<std::uint64_t>(i));
    const auto sol = gram.solver().backward().solve(normalized_white_noise(grid, tree, tree.levels(), rng));
    const auto prof = energy_profile(grid, tree, sol);
    const double hid = hidden_regularity_ratio(grid, tree, sol);
    finite = finite && std::isfinite(prof.c_hat);
    max_c = std::max(max_c, prof.c_hat);
    max_hidden = std::max(max_hidden, hid);
    e.rows.push_back({double(i), prof.c_hat, hid});
  }
  r.tables.push_back(std::move(e));

  r.scalar("min_ratio", min_ratio, "min over samples of |z_T|²_{E,H10} / Σ Δt E(|∂z/∂ν|²_{Γ0} + |Z|²_{H10})");
  r.scalar("max_ratio", max_ratio, "max over samples of the same quotient");
  r.flag("dense_spectrum", dense, "eigenvalues from the assembled Gramian (else inverse iteration)");
  r.scalar("min_eigenvalue", min_eig, "smallest eigenvalue of the Gramian in E⟨·,·⟩");
  if (dense)
    r.scalar("max_eigenvalue", max_eig, "largest eigenvalue of the Gramian in E⟨·,·⟩");
  else
    r.scalar("power_iterations", power_iterations, "inverse iteration steps");
  r.scalar("energy_c_hat_max", max_c, "max over samples of the smallest Ĉ in E|z_k|² ≤ e^{Ĉ r1}(E|z_j|² + ΣΔt E|Z|²)");
  r.scalar("hidden_regularity_max", max_hidden, "max over samples of (ΣΔt E|∂z/∂ν|²_Γ)^{1/2} / |z_T|_{E,H10}");
  r.check("gramian_positive_definite", min_eig > 1e-10 * std::max(max_eig, 1.0) || (!dense && min_eig > 0.0));
  r.check("ratio_bounded", std::isfinite(max_ratio));
  r.check("energy_c_hat_finite", finite);
  if (!refined.empty()) {
    const double max_fine = *std::max_element(refined.begin(), refined.end());
    const double factor = std::max(max_ratio / max_fine, max_fine / max_ratio);
    r.scalar("max_ratio_refined", max_fine, "max quotient with Δt halved");
    r.scalar("refinement_factor", factor, "max(max_ratio/max_ratio_refined, inverse)");
    r.check("ratio_stable", factor <= 2.0);
  }
}

void run_controllability(Report& r, const ExperimentConfig& cfg) {
  const Grid grid = cfg.make_grid();
  const FiltrationTree tree = cfg.make_tree();
  const Gramian gram(ForwardSolver(grid, tree, cfg.make_coefficients(grid, tree), grid.gamma0_mask(cfg.x0)));
  const GridFunction y0 = GridFunction::Zero(grid.size());

  Table summary{"controllability.csv",
                {"target", "iterations", "converged", "relative_residual", "u_norm", "g_norm"},
                {}};
  double worst = 0.0;
  int max_it = 0;
  bool all = true;
  for (int i = 0; i < cfg.targets; ++i) {
    RandomStream rng(cfg.seed, kTargetStream + static_cast<std::uint64_t>(i));
    const LevelValues y1 = cfg.target_kind == "smooth" ? smooth_functional_level(grid, tree, tree.levels(), rng)
                                                       : white_noise_level(grid, tree, tree.levels(), rng);
    const auto res = synthesize_controls(gram, y0, y1, {cfg.tol, cfg.max_iter});

    Table log{"convergence_target" + std::to_string(i) + ".csv",
              {"iteration", "hm1_residual", "relative_residual", "pairing_residual", "energy", "seconds"},
              {}};
    Table plot{"plot_residual_target" + std::to_string(i) + ".csv", {"iteration", "relative_residual"}, {}};
    for (const auto& e : res.log.entries) {
      log.rows.push_back({double(e.iteration), e.hm1_residual, e.relative_residual, e.pairing_residual, e.energy,
                          e.seconds});
      plot.rows.push_back({double(e.iteration), e.relative_residual});
    }
    r.tables.push_back(std::move(log));
    r.tables.push_back(std::move(plot));

    double u2 = 0.0, g2 = 0.0;
    for (int k = 0; k < tree.levels(); ++k) {
      for (Eigen::Index j = 0; j < tree.node_count(k); ++j)
        u2 += tree.dt() * tree.probability(k) * grid.boundary_norm_sq(res.controls.u.node(k, j));
      g2 += tree.dt() * expected_norm_sq(grid, tree, res.controls.g.level(k), NormKind::Hm1);
    }
    summary.rows.push_back({double(i), double(res.iterations), res.converged ? 1.0 : 0.0, res.relative_residual,
                            std::sqrt(u2), std::sqrt(g2)});
    worst = std::max(worst, res.relative_residual);
    max_it = std::max(max_it, res.iterations);
    all = all && res.converged && res.relative_residual <= cfg.tol;
  }
  r.tables.insert(r.tables.begin(), std::move(summary));
  r.scalar("max_relative_residual", worst, "max over targets of |y(T) − y1|_{E,Hm1} / |y1|_{E,Hm1} after verification");
  r.scalar("max_iterations", max_it, "max CG iterations over targets");
  r.flag("all_converged", all, "every target reached control.tol within control.max_iter");
  r.check("controllability", all);
}

void run_carleman(Report& r, const ExperimentConfig& cfg) {
  const Grid grid = cfg.make_grid();
  const FiltrationTree tree = cfg.make_tree();
  const auto p = WeightParams::make(grid, cfg.x0, cfg.sigma, cfg.s, cfg.lambda, cfg.horizon);
  const auto points = verification_points(grid);
  const auto times = interior_times(cfg.horizon, cfg.carleman_times);
  const auto fine_times = interior_times(cfg.horizon, 2 * cfg.carleman_times + 1);

  double psi_min = std::numeric_limits<double>::infinity();
  for (const auto& x : points) psi_min = std::min(psi_min, p.psi(x));
  r.scalar("sigma_min", sigma_min(grid, cfg.x0), "5·max|x−x0|² − 6·min|x−x0|² over the closed box, clamped at 0");
  r.scalar("sigma", p.sigma, "σ in use");
  r.scalar("psi_max", p.psi_max, "max of ψ over the closed box");
  r.check("psi_lower_bound", 6.0 * psi_min >= 5.0 * p.psi_max);

  const auto tb = weight_time_bounds(p, times, points);
  const auto tbf = weight_time_bounds(p, fine_times, points);
  const double f1 = std::max(tb.c1_hat / tbf.c1_hat, tbf.c1_hat / tb.c1_hat);
  const double f2 = std::max(tb.c2_hat / tbf.c2_hat, tbf.c2_hat / tb.c2_hat);
  r.scalar("C1_hat", tb.c1_hat, "max |ℓ_t| / (s φ^{3/2}) on the verification grid");
  r.scalar("C2_hat", tb.c2_hat, "max |ℓ_tt| / (s φ²) on the verification grid");
  r.scalar("C1_hat_refined", tbf.c1_hat, "same with the time grid refined");
  r.scalar("C2_hat_refined", tbf.c2_hat, "same with the time grid refined");
  r.check("time_bounds_stable", std::isfinite(tb.c1_hat) && std::isfinite(tb.c2_hat) && f1 <= 2.0 && f2 <= 2.0);

  const auto th = positivity_threshold(p, cfg.s_values, cfg.lambda_values, times, points);
  r.flag("threshold_found", th.found, "some (s, λ) in range has D ≥ s³λ⁴φ³|∇ψ|⁴ on the whole grid");
  r.scalar("threshold_s", th.s, "s of the returned pair (best failing pair when not found)");
  r.scalar("threshold_lambda", th.lambda, "λ of the returned pair");
  r.scalar("threshold_min_D_ratio", th.min_ratio, "min D / (s³λ⁴φ³|∇ψ|⁴) over the grid at that pair");
  r.scalar("threshold_witness_t", th.witness_t, "time of the worst node");
  r.scalar("threshold_witness_x", th.witness_x[0], "first coordinate of the worst node");
  r.check("positivity_threshold", th.found);

  Table sweep{"carleman_sweep.csv", {"s", "λ", "C1_hat", "C2_hat", "D_ratio_min"}, {}};
  for (double s : cfg.s_values)
    for (double lam : cfg.lambda_values) {
      const auto q = p.with(s, lam);
      const auto b = weight_time_bounds(q, times, points);
      sweep.rows.push_back({s, lam, b.c1_hat, b.c2_hat, d_ratio_min(q, times, points).min_ratio});
    }
  r.tables.push_back(std::move(sweep));

  // Quadratic form of c^{jk} on random (t, x, v).
  RandomStream rng(cfg.seed, kCarlemanStream);
  int violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.cjk_samples; ++i) {
    const double t = rng.uniform(0.0, cfg.horizon);
    if (!(t > 0.0)) continue;
    Point x{};
    for (int a = 0; a < grid.dim(); ++a) x[a] = rng.uniform(grid.lower(a), grid.upper(a));
    Eigen::Vector2cd v(rng.complex_normal(), grid.dim() == 2 ? rng.complex_normal() : cd{});
    const auto c = coefficients(p, t, x);
    const double form = cjk_quadratic_form(c.cjk, v, grid.dim());
    const double bound = 64.0 * p.s * p.lambda * std::exp(c.log_phi) * v.squaredNorm();
    if (!(form >= bound)) ++violations;
    min_slack = std::min(min_slack, form / bound);
  }
  r.scalar("cjk_samples", cfg.cjk_samples, "random (t, x, v) triples tested");
  r.scalar("cjk_violations", violations, "samples with Σc^{jk}(v_j v̄_k + v_k v̄_j) < 64 sλφ|v|²");
  r.scalar("cjk_min_ratio", min_slack, "min of the form over 64 sλφ|v|²");
  r.check("cjk_bound", violations == 0);

  // ℓ_t against centered differences.
  {
    const double t0 = 0.3 * cfg.horizon;
    const Point x = grid.node(0);
    const double exact = ell_t(p, t0, x);
    std::vector<double> hs, errs;
    Table conv{"plot_ell_t_fd.csv", {"h", "relative_error"}, {}};
    for (double h : {1e-2, 5e-3, 2.5e-3}) {
      const double step = h * cfg.horizon;
      const double fd = (weights(p, t0 + step, x).ell - weights(p, t0 - step, x).ell) / (2.0 * step);
      hs.push_back(step);
      errs.push_back(std::abs(fd - exact) / std::abs(exact));
      conv.rows.push_back({step, errs.back()});
    }
    r.tables.push_back(std::move(conv));
    const double sl = slope(hs, errs);
    r.scalar("ell_t_fd_slope", sl, "log-log slope of the centered-difference error in ℓ_t");
    r.check("ell_t_order", std::abs(sl - 2.0) <= 0.2);
  }

  // Empirical Carleman constant on random final data, at the threshold pair when found.
  const auto wp = th.found ? p.with(th.s, th.lambda) : p;
  auto ensemble = [&](const FiltrationTree& tr) {
    const auto mask = grid.gamma0_mask(cfg.x0);
    const BackwardSolver solver(grid, tr, cfg.make_coefficients(grid, tr).dual(grid));
    std::vector<CarlemanFunctional> out;
    for (int i = 0; i < cfg.functional_samples; ++i) {
      RandomStream frng(cfg.seed, kFunctionalStream + static_cast<std::uint64_t>(i));
      const auto sol = solver.solve(normalized_white_noise(grid, tr, tr.levels(), frng));
      out.push_back(carleman_functional(grid, tr, sol, mask, wp));
    }
    return out;
  };
  const auto base = ensemble(tree);
  Table ft{"carleman_functional.csv", {"sample", "log_lhs", "log_rhs", "C"}, {}};
  double max_c = 0.0;
  bool violation = false;
  for (std::size_t i = 0; i < base.size(); ++i) {
    ft.rows.push_back({double(i), base[i].log_lhs, base[i].log_rhs, base[i].constant});
    max_c = std::max(max_c, base[i].constant);
    violation = violation || base[i].violation;
  }
  r.tables.push_back(std::move(ft));
  r.scalar("functional_s", wp.s, "s used for the functional");
  r.scalar("functional_lambda", wp.lambda, "λ used for the functional");
  r.scalar("functional_C_max", max_c, "max over samples of LHS / RHS_core");
  r.check("functional_finite", !violation && std::isfinite(max_c));
  if (tree.levels() * 2 <= FiltrationTree::kMaxLevels) {
    const auto fine = ensemble(cfg.make_tree(2 * cfg.levels));
    double max_fine = 0.0;
    for (const auto& c : fine) max_fine = std::max(max_fine, c.constant);
    r.scalar("functional_C_max_refined", max_fine, "same with Δt halved");
    r.scalar("functional_refinement_factor", std::max(max_c / max_fine, max_fine / max_c),
             "max(C/C_refined, inverse)");
  }
}

void run_noncontrol(Report& r, const ExperimentConfig& cfg) {
  if (cfg.coeff.kind != "random" && cfg.coeff.kind != "unit_noise")
    throw ConfigError("noncontrol: the instance is fixed to a1 = a2 = 0, a3 = 1; drop coeff.kind", "coeff.kind");
  const Grid grid = cfg.make_grid();
  const FiltrationTree tree = cfg.make_tree();
  const int K = tree.levels();
  RandomStream rng(cfg.seed, kNoncontrolStream);

  // Mean identity with a random diffusion control.
  GridFunction y_init = smooth_grid_function(grid, rng);
  y_init /= grid.norm(y_init, NormKind::Hm1);
  const auto me = mean_evolution_check(grid, tree, y_init, white_noise_field(tree, grid.size(), 0, K - 1, rng));
  r.scalar("mean_identity_discrepancy", me.discrepancy, "|E y(T) − S_h(T) E y0|_{Hm1} with random g, |y0|_{Hm1} = 1");
  r.check("mean_identity", me.discrepancy <= 1e-12);

  const GridFunction y0 = GridFunction::Zero(grid.size());
  LevelValues y1 = LevelValues::Zero(grid.size(), tree.node_count(K));
  if (cfg.noncontrol_target != "zero") {
    LevelValues fluct = smooth_functional_level(grid, tree, K, rng);
    fluct.colwise() -= expectation(tree, fluct);
    y1 = fluct;
    if (cfg.noncontrol_target == "mean_shift") y1.colwise() += cfg.noncontrol_shift * smooth_grid_function(grid, rng);
  }
  const auto cert = unreachability_demo(grid, tree, y0, y1, {cfg.tol, cfg.max_iter});

  Table t{"noncontrol_residuals.csv", {"iteration", "residual", "lower_bound"}, {}};
  for (std::size_t i = 0; i < cert.residuals.size(); ++i)
    t.rows.push_back({double(i), cert.residuals[i], cert.lower_bound});
  r.tables.push_back(std::move(t));
  Table plot{"plot_noncontrol_residual.csv", {"iteration", "residual"}, {}};
  for (std::size_t i = 0; i < cert.residuals.size(); ++i) plot.rows.push_back({double(i), cert.residuals[i]});
  r.tables.push_back(std::move(plot));

  r.scalar("lower_bound", cert.lower_bound, "|E y1 − S_h(T) E y0|_{Hm1}");
  r.scalar("min_residual", cert.min_residual, "min over CG iterates of |y(T) − y1|_{E,Hm1}");
  r.scalar("final_relative_residual", cert.final_relative_residual, "|y(T) − y1|_{E,Hm1} / |y1|_{E,Hm1} at the returned iterate");
  r.scalar("max_mean_drift", cert.max_mean_drift, "max over iterates of |E y(T) − E y_free(T)|_{Hm1}");
  r.scalar("iterations", cert.iterations, "CG iterations of the g-only synthesis");
  r.flag("unreachable", cert.unreachable, "lower bound above round-off");
  r.flag("converged", cert.converged, "g-only synthesis reached control.tol");
  r.check("bound_respected", cert.bound_respected);
  if (cfg.noncontrol_target == "mean_shift") r.check("unreachable", cert.unreachable);
}

}  // namespace

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

void Report::scalar(const std::string& name, double value, const std::string& definition) {
  summary["scalars"][name] = {{"value", json_number(value)}, {"definition", definition}};
}

void Report::flag(const std::string& name, bool value, const std::string& definition) {
  summary["scalars"][name] = {{"value", value}, {"definition", definition}};
}

void Report::check(const std::string& name, bool passed) {
  summary["checks"][name] = passed;
  checks_passed = checks_passed && passed;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"duality", "observability", "controllability", "carleman",
                                              "noncontrol"};
  return names;
}

Report run_experiment(const std::string& name, const ExperimentConfig& config) {
  config.validate();
  Report r;
  r.experiment = name;
  r.summary["experiment"] = name;
  r.summary["checks"] = nlohmann::json::object();
  echo_config(r, config);
  const auto start = std::chrono::steady_clock::now();
  if (name == "duality")
    run_duality(r, config);
  else if (name == "observability")
    run_observability(r, config);
  else if (name == "controllability")
    run_controllability(r, config);
  else if (name == "carleman")
    run_carleman(r, config);
  else if (name == "noncontrol")
    run_noncontrol(r, config);
  else
    throw ConfigError("unknown experiment '" + name + "'", "experiment");
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json files = nlohmann::json::array();
  for (const auto& t : r.tables) files.push_back(t.file);
  r.summary["tables"] = files;
  r.summary["all_checks_passed"] = r.checks_passed;
  return r;
}

void emit_tables(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    out.precision(17);
    return out;
  };
  for (const auto& t : report.tables) {
    auto out = open(t.file);
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing '" + t.file + "'");
  }
  {
    auto out = open("report.json");
    out << report.summary.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing report.json");
  }
  {
    auto out = open("timing.json");
    out << nlohmann::json{{"experiment", report.experiment}, {"seconds", report.seconds}}.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing timing.json");
  }
}

}  // namespace sscontrol
