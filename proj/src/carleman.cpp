#include "sscontrol/carleman.hpp"

#include "sscontrol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sscontrol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BoxDistances {
  double min_sq = 0.0;
  double max_sq = 0.0;
};

BoxDistances box_distances(const Grid& grid, std::span<const double> x0) {
  if (static_cast<int>(x0.size()) != grid.dim())
    throw ConfigError("weights: x0 dimension does not match the grid", "weights.x0");
  BoxDistances d;
  bool inside = true;
  for (int a = 0; a < grid.dim(); ++a) {
    const double lo = grid.lower(a), hi = grid.upper(a), c = x0[a];
    if (!std::isfinite(c)) throw ConfigError("weights: x0 not finite", "weights.x0");
    inside = inside && c >= lo && c <= hi;
    const double far = std::max(std::abs(c - lo), std::abs(c - hi));
    const double near = c < lo ? lo - c : (c > hi ? c - hi : 0.0);
    d.max_sq += far * far;
    d.min_sq += near * near;
  }
  if (inside) throw ConfigError("weights: x0 must lie outside the closure of G", "weights.x0");
  return d;
}

void check_time(const WeightParams& p, double t) {
  if (!(t > 0.0 && t < p.horizon)) throw DomainError("carleman: weights need 0 < t < T");
}

// log|e^{4λψ} − e^{5λ|ψ|∞}|.
double log_gap(const WeightParams& p, double psi) {
  const double hi = 5.0 * p.lambda * p.psi_max;
  return hi + std::log1p(-std::exp(4.0 * p.lambda * psi - hi));
}

double log_q(const WeightParams& p, double t) { return std::log(t * (p.horizon - t)); }

// Running Σ e^{v} with a max shift.
class LogSum {
 public:
  void add(double log_value) {
    if (log_value == -kInf) return;
    if (log_value > max_) {
      acc_ = acc_ * std::exp(max_ - log_value) + 1.0;
      max_ = log_value;
    } else {
      acc_ += std::exp(log_value - max_);
    }
  }
  // Σ_i e^{logw_i}·v_i for v_i ≥ 0.
  void add_weighted(const Eigen::VectorXd& log_w, const Eigen::VectorXd& values) {
    double m = -kInf;
    for (Eigen::Index i = 0; i < values.size(); ++i)
      if (values[i] > 0.0) m = std::max(m, log_w[i]);
    if (m == -kInf) return;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i)
      if (values[i] > 0.0) acc += std::exp(log_w[i] - m) * values[i];
    add(m + std::log(acc));
  }
  bool empty() const { return max_ == -kInf; }
  double log() const { return empty() ? -kInf : max_ + std::log(acc_); }

 private:
  double max_ = -kInf;
  double acc_ = 0.0;
};

}  // namespace

double sigma_min(const Grid& grid, std::span<const double> x0) {
  const auto d = box_distances(grid, x0);
  return std::max(0.0, 5.0 * d.max_sq - 6.0 * d.min_sq);
}

WeightParams WeightParams::make(const Grid& grid, std::span<const double> x0, double sigma, double s, double lambda,
                                double horizon) {
  const auto d = box_distances(grid, x0);
  const double smin = std::max(0.0, 5.0 * d.max_sq - 6.0 * d.min_sq);
  if (!std::isfinite(sigma)) throw ConfigError("weights: sigma not finite", "weights.sigma");
  if (sigma < 0.0) sigma = smin;
  if (sigma < smin) throw ConfigError("weights: sigma below sigma_min", "weights.sigma");
  if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("weights: s must be positive", "weights.s");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("weights: lambda must be positive", "weights.lambda");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("weights: T must be positive", "tree.T");
  WeightParams p;
  p.dim = grid.dim();
  for (int a = 0; a < grid.dim(); ++a) p.x0[static_cast<std::size_t>(a)] = x0[a];
  p.sigma = sigma;
  p.s = s;
  p.lambda = lambda;
  p.horizon = horizon;
  p.psi_max = d.max_sq + sigma;
  return p;
}

WeightParams WeightParams::with(double s_value, double lambda_value) const {
  WeightParams p = *this;
  p.s = s_value;
  p.lambda = lambda_value;
  return p;
}

double WeightParams::psi(const Point& x) const {
  double r = 0.0;
  for (int a = 0; a < dim; ++a) r += (x[a] - x0[a]) * (x[a] - x0[a]);
  return r + sigma;
}

double WeightParams::grad_psi_sq(const Point& x) const { return 4.0 * (psi(x) - sigma); }

WeightValues weights(const WeightParams& p, double t, const Point& x) {
  check_time(p, t);
  WeightValues w;
  w.psi = p.psi(x);
  const double lq = log_q(p, t);
  w.ell = -p.s * std::exp(log_gap(p, w.psi) - 2.0 * lq);
  w.log_phi = 4.0 * p.lambda * w.psi - 2.0 * lq;
  w.log_theta = w.ell;
  return w;
}

double ell_t(const WeightParams& p, double t, const Point& x) {
  check_time(p, t);
  const double poly = 2.0 * (2.0 * t - p.horizon);
  if (poly == 0.0) return 0.0;
  // e^{4λψ} − e^{5λ|ψ|∞} < 0.
  const double mag = std::exp(std::log(p.s) + log_gap(p, p.psi(x)) + std::log(std::abs(poly)) - 3.0 * log_q(p, t));
  return poly > 0.0 ? -mag : mag;
}

double ell_tt(const WeightParams& p, double t, const Point& x) {
  check_time(p, t);
  const double T = p.horizon;
  const double poly = 20.0 * t * t - 20.0 * t * T + 6.0 * T * T;
  return -std::exp(std::log(p.s) + log_gap(p, p.psi(x)) + std::log(poly) - 4.0 * log_q(p, t));
}

TimeBounds weight_time_bounds(const WeightParams& p, std::span<const double> times, std::span<const Point> points) {
  TimeBounds b;
  const double T = p.horizon;
  for (double t : times) {
    check_time(p, t);
    const double p1 = 2.0 * std::abs(2.0 * t - T);
    const double p2 = 20.0 * t * t - 20.0 * t * T + 6.0 * T * T;
    for (const auto& x : points) {
      // |ℓ_t|/(sφ^{3/2}) = 2|2t−T|·|E − c|·e^{−6λψ}; |ℓ_tt|/(sφ²) = p2·|E − c|·e^{−8λψ}.
      const double psi = p.psi(x);
      const double lg = log_gap(p, psi);
      if (p1 > 0.0) b.c1_hat = std::max(b.c1_hat, p1 * std::exp(lg - 6.0 * p.lambda * psi));
      b.c2_hat = std::max(b.c2_hat, p2 * std::exp(lg - 8.0 * p.lambda * psi));
    }
  }
  return b;
}

CarlemanCoefficients coefficients(const WeightParams& p, double t, const Point& x) {
  check_time(p, t);
  const int n = p.dim;
  const double s = p.s, lam = p.lambda, T = p.horizon;
  const double psi = p.psi(x);
  const double G = p.grad_psi_sq(x);
  const double lq = log_q(p, t);

  CarlemanCoefficients c;
  c.grad_psi_sq = G;
  c.log_phi = 4.0 * lam * psi - 2.0 * lq;
  const double phi = std::exp(c.log_phi);

  c.A = 16.0 * s * s * lam * lam * phi * phi * G;

  const double poly = 256.0 * std::pow(lam, 4) * G * G + (256.0 * n + 512.0) * std::pow(lam, 3) * G +
                      (64.0 * n * n + 128.0 * n) * lam * lam;
  const double tpoly = 20.0 * t * t - 20.0 * t * T + 6.0 * T * T;
  const double log_norm = 3.0 * std::log(s) + 4.0 * std::log(lam) + 3.0 * c.log_phi + 2.0 * std::log(G);
  const double lower_ratio = std::exp(std::log(poly) + std::log(s) + c.log_phi - log_norm);
  const double time_ratio = std::exp(std::log(s) + log_gap(p, psi) + std::log(tpoly) - 4.0 * lq - log_norm);
  c.D_ratio = 1024.0 + 512.0 / (lam * G) - lower_ratio - time_ratio;

  const double norm = std::exp(log_norm);
  c.D_leading = 1024.0 * norm;
  c.D_cubic = 512.0 / (lam * G) * norm;
  c.D_lower = -lower_ratio * norm;
  c.D_time = -time_ratio * norm;
  c.D = c.D_ratio == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(c.D_ratio)) + log_norm), c.D_ratio);

  const double g[2] = {2.0 * (x[0] - p.x0[0]), n > 1 ? 2.0 * (x[1] - p.x0[1]) : 0.0};
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      c.cjk_over_slphi(j, k) = 32.0 * lam * g[j] * g[k] + (j == k ? 32.0 : 0.0);
      c.cjk(j, k) = 32.0 * s * lam * lam * phi * g[j] * g[k] + (j == k ? 16.0 * s * lam * phi * 2.0 : 0.0);
    }
  return c;
}

Eigen::Matrix2d cjk_hessian_over_slphi(const WeightParams& p, const Point& x) {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  const double g[2] = {2.0 * (x[0] - p.x0[0]), p.dim > 1 ? 2.0 * (x[1] - p.x0[1]) : 0.0};
  for (int j = 0; j < p.dim; ++j)
    for (int k = 0; k < p.dim; ++k) h(j, k) = 32.0 * p.lambda * g[j] * g[k] + (j == k ? 16.0 : 0.0);
  return h;
}

double cjk_quadratic_form(const Eigen::Matrix2d& c, const Eigen::Vector2cd& v, int dim) {
  double acc = 0.0;
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) acc += c(j, k) * 2.0 * (v[j] * std::conj(v[k])).real();
  return acc;
}

ThresholdResult d_ratio_min(const WeightParams& p, std::span<const double> times, std::span<const Point> points) {
  if (times.empty() || points.empty()) throw ConfigError("carleman: empty verification grid", "carleman.times");
  ThresholdResult r;
  r.s = p.s;
  r.lambda = p.lambda;
  r.min_ratio = kInf;
  for (double t : times)
    for (const auto& x : points) {
      const double ratio = coefficients(p, t, x).D_ratio;
      if (ratio < r.min_ratio || std::isnan(ratio)) {
        r.min_ratio = ratio;
        r.witness_t = t;
        r.witness_x = x;
      }
    }
  r.pairs_tried = 1;
  r.found = r.min_ratio >= 1.0;
  return r;
}

ThresholdResult positivity_threshold(const WeightParams& base, std::span<const double> s_values,
                                     std::span<const double> lambdas, std::span<const double> times,
                                     std::span<const Point> points) {
  if (s_values.empty()) throw ConfigError("positivity_threshold: empty s range", "carleman.s_values");
  if (lambdas.empty()) throw ConfigError("positivity_threshold: empty lambda range", "carleman.lambda_values");
  std::vector<double> ss(s_values.begin(), s_values.end());
  std::vector<double> ls(lambdas.begin(), lambdas.end());
  std::sort(ss.begin(), ss.end());
  std::sort(ls.begin(), ls.end());

  ThresholdResult best;
  best.min_ratio = -kInf;
  int tried = 0;
  for (double lam : ls) {
    for (double s : ss) {
      auto r = d_ratio_min(base.with(s, lam), times, points);
      ++tried;
      if (r.found) {
        r.pairs_tried = tried;
        return r;
      }
      if (r.min_ratio > best.min_ratio || std::isnan(best.min_ratio)) best = r;
    }
  }
  best.found = false;
  best.pairs_tried = tried;
  return best;
}

CarlemanFunctional carleman_functional(const Grid& grid, const FiltrationTree& tree, const BackwardSolution& sol,
                                       const Gamma0Mask& gamma0, const WeightParams& p) {
  const int kf = sol.final_level;
  if (std::abs(p.horizon - tree.time(kf)) > 1e-12 * p.horizon)
    throw std::invalid_argument("carleman_functional: weight horizon must equal the final time of the solution");
  if (gamma0.size() != static_cast<std::size_t>(grid.boundary_size()))
    throw std::invalid_argument("carleman_functional: Γ0 mask does not match the grid");

  const int n = grid.dim();
  const double ls = std::log(p.s), ll = std::log(p.lambda);
  const auto faces = grid.boundary_nodes();

  LogSum lhs, rhs;
  for (int k = 1; k < kf; ++k) {
    const double t = tree.time(k);
    const double log_mass = std::log(sol.dt * tree.probability(k) * grid.cell_volume());

    // Node weights: θ²s³λ⁴φ³ and θ²s²λ²φ².
    Eigen::VectorXd w_z(grid.size()), w_Z(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const auto w = weights(p, t, grid.node(i));
      w_z[i] = log_mass + 2.0 * w.ell + 3.0 * ls + 4.0 * ll + 3.0 * w.log_phi;
      w_Z[i] = log_mass + 2.0 * w.ell + 2.0 * ls + 2.0 * ll + 2.0 * w.log_phi;
    }
    // Edge weights at midpoints: θ²sλφ and θ².
    std::vector<Eigen::VectorXd> w_gz(static_cast<std::size_t>(n)), w_gZ(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      auto& gz = w_gz[static_cast<std::size_t>(a)];
      auto& gZ = w_gZ[static_cast<std::size_t>(a)];
      gz.resize(grid.edge_count(a));
      gZ.resize(grid.edge_count(a));
      for (Eigen::Index e = 0; e < gz.size(); ++e) {
        const auto w = weights(p, t, grid.edge_midpoint(a, e));
        gz[e] = log_mass + 2.0 * w.ell + ls + ll + w.log_phi;
        gZ[e] = log_mass + 2.0 * w.ell;
      }
    }
    // Γ0 flux weights: θ²sλφ times the surface weight.
    Eigen::VectorXd w_flux(static_cast<Eigen::Index>(faces.size()));
    const double log_bmass = std::log(sol.dt * tree.probability(k));
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto w = weights(p, t, faces[f].x);
      w_flux[static_cast<Eigen::Index>(f)] =
          gamma0[f] ? log_bmass + std::log(faces[f].weight) + 2.0 * w.ell + ls + ll + w.log_phi : -kInf;
    }

    for (Eigen::Index j = 0; j < tree.node_count(k); ++j) {
      const GridFunction z = sol.z.node(k, j);
      const GridFunction Z = sol.Z.node(k, j);
      lhs.add_weighted(w_z, z.cwiseAbs2());
      rhs.add_weighted(w_Z, Z.cwiseAbs2());
      for (int a = 0; a < n; ++a) {
        lhs.add_weighted(w_gz[static_cast<std::size_t>(a)], grid.edge_gradient(a, z).cwiseAbs2());
        rhs.add_weighted(w_gZ[static_cast<std::size_t>(a)], grid.edge_gradient(a, Z).cwiseAbs2());
      }
      Eigen::VectorXd flux = sol.flux.node(k, j).cwiseAbs2();
      for (std::size_t f = 0; f < faces.size(); ++f)
        if (!gamma0[f]) flux[static_cast<Eigen::Index>(f)] = 0.0;
      rhs.add_weighted(w_flux, flux);
    }
  }

  CarlemanFunctional c;
  c.log_lhs = lhs.log();
  c.log_rhs = rhs.log();
  if (lhs.empty() && rhs.empty()) {
    c.vacuous = true;
    return c;
  }
  if (rhs.empty()) {
    c.violation = true;
    c.log_constant = kInf;
    c.constant = kInf;
    return c;
  }
  c.log_constant = c.log_lhs - c.log_rhs;
  c.constant = std::exp(c.log_constant);
  return c;
}

}  // namespace sscontrol
