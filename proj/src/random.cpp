#include "sscontrol/random.hpp"

#include <cmath>
#include <numbers>

namespace sscontrol {

namespace {

std::seed_seq make_seq(std::uint64_t seed, std::uint64_t stream) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(seed), hi(seed), lo(stream), hi(stream)};
}

// Coordinate rescaled to [0, 1] along `axis`.
double unit(const Grid& grid, const Point& x, int axis) {
  return (x[axis] - grid.lower(axis)) / (grid.upper(axis) - grid.lower(axis));
}

double sine_mode(const Grid& grid, const Point& x, int m0, int m1) {
  double v = std::sin(m0 * std::numbers::pi * unit(grid, x, 0));
  if (grid.dim() == 2) v *= std::sin(m1 * std::numbers::pi * unit(grid, x, 1));
  return v;
}

std::vector<std::array<int, 2>> mode_list(const Grid& grid, int modes) {
  std::vector<std::array<int, 2>> out;
  for (int a = 1; a <= modes; ++a) {
    if (grid.dim() == 1) {
      out.push_back({a, 1});
      continue;
    }
    for (int b = 1; b <= modes; ++b) out.push_back({a, b});
  }
  return out;
}

// A smooth profile of (t, B, x) bounded by 1 in modulus.
struct Profile {
  double freq[2];
  double phase[3];
  double weight;

  static Profile draw(RandomStream& rng) {
    Profile p;
    p.freq[0] = rng.uniform(0.5, 2.0);
    p.freq[1] = rng.uniform(0.5, 2.0);
    for (double& ph : p.phase) ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p.weight = rng.uniform(-1.0, 1.0);
    return p;
  }

  double operator()(const Grid& grid, double t_frac, double B, const Point& x) const {
    double shape = std::cos(freq[0] * std::numbers::pi * unit(grid, x, 0) + phase[0]);
    if (grid.dim() == 2) shape *= std::cos(freq[1] * std::numbers::pi * unit(grid, x, 1) + phase[1]);
    const double path = 0.5 + 0.25 * std::sin(B + phase[2]) + 0.25 * t_frac;
    return weight * shape * path;
  }
};

double bump(const Grid& grid, const Point& x) { return sine_mode(grid, x, 1, 1); }

double path_value(const FiltrationTree& tree, int k, Eigen::Index j, bool adapted) {
  return adapted ? tree.path_sum(k, j) : 0.0;
}

RealCoefficient real_vanishing(const Grid& grid, const FiltrationTree& tree, RandomStream& rng, double amplitude,
                               bool adapted) {
  const auto p = Profile::draw(rng);
  const double T = tree.horizon();
  auto f = [&](int k, Eigen::Index j, const Point& x) {
    return amplitude * bump(grid, x) * p(grid, tree.time(k) / T, path_value(tree, k, j, adapted), x);
  };
  if (!adapted)
    return RealCoefficient::deterministic(grid, tree, [&](double t, const Point& x) {
      return amplitude * bump(grid, x) * p(grid, t / T, 0.0, x);
    });
  return RealCoefficient::adapted(grid, tree, f);
}

ComplexCoefficient complex_smooth(const Grid& grid, const FiltrationTree& tree, RandomStream& rng, double amplitude,
                                  bool adapted) {
  const auto re = Profile::draw(rng);
  const auto im = Profile::draw(rng);
  const double T = tree.horizon();
  const double scale = amplitude / std::numbers::sqrt2;
  if (!adapted)
    return ComplexCoefficient::deterministic(grid, tree, [&](double t, const Point& x) {
      return scale * cd{re(grid, t / T, 0.0, x), im(grid, t / T, 0.0, x)};
    });
  return ComplexCoefficient::adapted(grid, tree, [&](int k, Eigen::Index j, const Point& x) {
    const double B = tree.path_sum(k, j);
    const double tf = tree.time(k) / T;
    return scale * cd{re(grid, tf, B, x), im(grid, tf, B, x)};
  });
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seq(seed, stream);
  engine_.seed(seq);
}

cd RandomStream::complex_normal() {
  const double a = normal(), b = normal();
  return cd{a, b} / std::numbers::sqrt2;
}

GridFunction random_grid_function(const Grid& grid, RandomStream& rng) {
  GridFunction v(grid.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.complex_normal();
  return v;
}

Eigen::MatrixXcd white_noise_level(const Grid& grid, const FiltrationTree& tree, int level, RandomStream& rng,
                                   Eigen::Index rows) {
  const Eigen::Index r = rows < 0 ? grid.size() : rows;
  Eigen::MatrixXcd m(r, tree.node_count(level));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.complex_normal();
  return m;
}

Eigen::MatrixXcd normalized_white_noise(const Grid& grid, const FiltrationTree& tree, int level, RandomStream& rng) {
  Eigen::MatrixXcd m = white_noise_level(grid, tree, level, rng);
  m /= std::sqrt(expected_norm_sq(grid, tree, m, NormKind::H10));
  return m;
}

AdaptedField white_noise_field(const FiltrationTree& tree, Eigen::Index rows, int first, int last,
                               RandomStream& rng) {
  AdaptedField f(tree, rows, first, last);
  for (int k = first; k <= last; ++k) {
    auto& m = f.level(k);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
  }
  return f;
}

Eigen::MatrixXcd smooth_functional_level(const Grid& grid, const FiltrationTree& tree, int level, RandomStream& rng,
                                         int modes) {
  const auto list = mode_list(grid, modes);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(grid.size(), tree.node_count(level));
  for (const auto& md : list) {
    const double decay = 1.0 / (md[0] * md[1]);
    const cd alpha = decay * rng.complex_normal();
    const cd beta = decay * rng.complex_normal();
    const cd gamma = decay * rng.complex_normal();
    const GridFunction e = grid.sample([&](const Point& x) { return cd{sine_mode(grid, x, md[0], md[1])}; });
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const double B = tree.path_sum(level, j);
      out.col(j) += (alpha + beta * B + gamma * std::sin(B)) * e;
    }
  }
  return out;
}

GridFunction smooth_grid_function(const Grid& grid, RandomStream& rng, int modes) {
  GridFunction v = GridFunction::Zero(grid.size());
  for (const auto& md : mode_list(grid, modes)) {
    const cd c = rng.complex_normal() / double(md[0] * md[1]);
    v += c * grid.sample([&](const Point& x) { return cd{sine_mode(grid, x, md[0], md[1])}; });
  }
  return v;
}

ForwardCoefficients random_forward_coefficients(const Grid& grid, const FiltrationTree& tree, RandomStream& rng,
                                                double amplitude, bool adapted) {
  ForwardCoefficients f;
  for (int a = 0; a < grid.dim(); ++a) f.ia1.push_back(real_vanishing(grid, tree, rng, amplitude, adapted));
  f.a2 = complex_smooth(grid, tree, rng, amplitude, adapted);
  f.a3 = complex_smooth(grid, tree, rng, amplitude, adapted);
  return f;
}

DualCoefficients random_dual_coefficients(const Grid& grid, const FiltrationTree& tree, RandomStream& rng,
                                          double amplitude, bool adapted) {
  DualCoefficients d;
  for (int a = 0; a < grid.dim(); ++a) d.c1.push_back(real_vanishing(grid, tree, rng, amplitude, adapted));
  d.b2 = complex_smooth(grid, tree, rng, amplitude, adapted);
  d.b3 = complex_smooth(grid, tree, rng, amplitude, adapted);
  return d;
}

}  // namespace sscontrol
