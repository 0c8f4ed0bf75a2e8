#include "sscontrol/config.hpp"

#include "sscontrol/carleman.hpp"
#include "sscontrol/errors.hpp"
#include "sscontrol/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sscontrol {

namespace {

constexpr std::uint64_t kCoefficientStream = 0x636f6566ULL;
constexpr Eigen::Index kMaxStoredValues = Eigen::Index{1} << 24;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double out = 0.0;
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, out);
  if (t.empty() || r.ec != std::errc{} || r.ptr != end || !std::isfinite(out))
    throw ConfigError("config: " + key + ": expected a finite number, got '" + t + "'", key);
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long long out = 0;
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, out);
  if (t.empty() || r.ec != std::errc{} || r.ptr != end)
    throw ConfigError("config: " + key + ": expected an integer, got '" + t + "'", key);
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError("config: " + key + ": integer out of range", key);
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError("config: " + key + ": expected true or false", key);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  if (out.empty()) throw ConfigError("config: " + key + ": empty list", key);
  return out;
}

cd to_complex(const std::string& key, const std::string& v) {
  const auto parts = to_list(key, v);
  if (parts.size() > 2) throw ConfigError("config: " + key + ": expected 're' or 're,im'", key);
  return {parts[0], parts.size() == 2 ? parts[1] : 0.0};
}

CoefficientTable to_table(const std::string& key, const std::string& v) {
  CoefficientTable t;
  for (const auto& knot : split(v, ',')) {
    const auto f = split(knot, ':');
    if (f.size() < 2 || f.size() > 3) throw ConfigError("config: " + key + ": knots are x:re or x:re:im", key);
    t.x.push_back(to_double(key, f[0]));
    t.values.emplace_back(to_double(key, f[1]), f.size() == 3 ? to_double(key, f[2]) : 0.0);
  }
  if (t.x.empty()) throw ConfigError("config: " + key + ": empty table", key);
  if (!std::is_sorted(t.x.begin(), t.x.end()) || std::adjacent_find(t.x.begin(), t.x.end()) != t.x.end())
    throw ConfigError("config: " + key + ": knots must be strictly increasing in x", key);
  return t;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::string fmt_complex(cd c) { return fmt(c.real()) + "," + fmt(c.imag()); }

std::string fmt_table(const CoefficientTable& t) {
  std::string s;
  for (std::size_t i = 0; i < t.x.size(); ++i)
    s += (i ? "," : "") + fmt(t.x[i]) + ":" + fmt(t.values[i].real()) + ":" + fmt(t.values[i].imag());
  return s;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config: " + key + ": " + what, key);
}

ComplexCoefficient sample_table(const Grid& grid, const FiltrationTree& tree, const CoefficientTable& t) {
  return ComplexCoefficient::deterministic(grid, tree, [&](double, const Point& x) { return t(x[0]); });
}

}  // namespace

cd CoefficientTable::operator()(double at) const {
  if (at <= x.front()) return values.front();
  if (at >= x.back()) return values.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (at - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "grid.extents") {
    extents.clear();
    for (const auto& axis : split(value, ';')) {
      const auto ab = to_list(key, axis);
      require(ab.size() == 2, key, "each axis needs 'a,b'");
      extents.emplace_back(ab[0], ab[1]);
    }
  } else if (key == "grid.counts") {
    counts.clear();
    for (const auto& c : split(value, ',')) counts.push_back(to_int(key, c));
  } else if (key == "tree.T") {
    horizon = to_double(key, value);
  } else if (key == "tree.K") {
    levels = to_int(key, value);
  } else if (key == "coeff.kind") {
    coeff.kind = trim(value);
  } else if (key == "coeff.amplitude") {
    coeff.amplitude = to_double(key, value);
  } else if (key == "coeff.adapted") {
    coeff.adapted = to_bool(key, value);
  } else if (key == "coeff.a2") {
    coeff.a2 = to_complex(key, value);
  } else if (key == "coeff.a3") {
    coeff.a3 = to_complex(key, value);
  } else if (key == "coeff.ia1.table") {
    coeff.ia1_table = to_table(key, value);
  } else if (key == "coeff.a2.table") {
    coeff.a2_table = to_table(key, value);
  } else if (key == "coeff.a3.table") {
    coeff.a3_table = to_table(key, value);
  } else if (key == "weights.x0") {
    x0 = to_list(key, value);
  } else if (key == "weights.sigma") {
    sigma = trim(value) == "auto" ? -1.0 : to_double(key, value);
    require(trim(value) == "auto" || sigma >= 0.0, key, "must be 'auto' or non-negative");
  } else if (key == "weights.s") {
    s = to_double(key, value);
  } else if (key == "weights.lambda") {
    lambda = to_double(key, value);
  } else if (key == "carleman.s_values") {
    s_values = to_list(key, value);
  } else if (key == "carleman.lambda_values") {
    lambda_values = to_list(key, value);
  } else if (key == "carleman.times") {
    carleman_times = to_int(key, value);
  } else if (key == "carleman.cjk_samples") {
    cjk_samples = to_int(key, value);
  } else if (key == "carleman.functional_samples") {
    functional_samples = to_int(key, value);
  } else if (key == "control.tol") {
    tol = to_double(key, value);
  } else if (key == "control.max_iter") {
    max_iter = to_int(key, value);
  } else if (key == "control.targets") {
    targets = to_int(key, value);
  } else if (key == "control.target") {
    target_kind = trim(value);
  } else if (key == "duality.samples") {
    duality_samples = to_int(key, value);
  } else if (key == "observability.samples") {
    observability_samples = to_int(key, value);
  } else if (key == "observability.refine") {
    observability_refine = to_bool(key, value) ? 1 : 0;
  } else if (key == "noncontrol.target") {
    noncontrol_target = trim(value);
  } else if (key == "noncontrol.shift") {
    noncontrol_shift = to_double(key, value);
  } else if (key == "run.seed") {
    const long long v = to_integer(key, value);
    require(v >= 0, key, "must be non-negative");
    seed = static_cast<std::uint64_t>(v);
  } else {
    throw ConfigError("config: unknown key '" + key + "'", key);
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'", key);
    cfg.set(key, line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'", "--config");
  return parse(in);
}

void ExperimentConfig::validate() const {
  require(extents.size() == counts.size(), "grid.counts", "need one count per axis of grid.extents");
  const Grid grid = make_grid();
  const FiltrationTree tree = make_tree();
  require(grid.size() <= 1024, "grid.counts", "at most 1024 interior nodes");
  require(tree.node_count(levels) * grid.size() <= kMaxStoredValues, "tree.K",
          "too many leaf values for the given grid");
  require(static_cast<int>(x0.size()) == grid.dim(), "weights.x0", "needs one coordinate per axis");
  (void)grid.gamma0_mask(x0);
  (void)WeightParams::make(grid, x0, sigma, s, lambda, horizon);

  static const std::set<std::string> kinds{"random", "zero", "constant", "table", "unit_noise"};
  require(kinds.count(coeff.kind) == 1, "coeff.kind", "one of random, zero, constant, table, unit_noise");
  require(coeff.amplitude >= 0.0, "coeff.amplitude", "must be non-negative");
  if (coeff.ia1_table) {
    require(coeff.kind == "table", "coeff.ia1.table", "tables need coeff.kind = table");
    require(grid.dim() == 1, "coeff.ia1.table", "an axis-0 profile cannot vanish on the faces of a 2D box");
    const auto& t = *coeff.ia1_table;
    for (const auto& v : t.values) require(v.imag() == 0.0, "coeff.ia1.table", "i·a1 must be real");
    require(t(grid.lower(0)) == cd{} && t(grid.upper(0)) == cd{}, "coeff.ia1.table", "i·a1 must vanish on the boundary");
  }
  if (coeff.a2_table) require(coeff.kind == "table", "coeff.a2.table", "tables need coeff.kind = table");
  if (coeff.a3_table) require(coeff.kind == "table", "coeff.a3.table", "tables need coeff.kind = table");

  require(!s_values.empty(), "carleman.s_values", "empty range");
  require(!lambda_values.empty(), "carleman.lambda_values", "empty range");
  for (double v : s_values) require(v > 0.0, "carleman.s_values", "values must be positive");
  for (double v : lambda_values) require(v > 0.0, "carleman.lambda_values", "values must be positive");
  require(carleman_times >= 2, "carleman.times", "need at least 2 interior times");
  require(cjk_samples >= 1, "carleman.cjk_samples", "must be positive");
  require(functional_samples >= 1, "carleman.functional_samples", "must be positive");

  require(tol > 0.0, "control.tol", "must be positive");
  require(max_iter >= 1, "control.max_iter", "must be positive");
  require(targets >= 1, "control.targets", "must be positive");
  require(target_kind == "white" || target_kind == "smooth", "control.target", "white or smooth");

  require(duality_samples >= 1, "duality.samples", "must be positive");
  require(observability_samples >= 1, "observability.samples", "must be positive");
  if (observability_refine) {
    require(2 * levels <= FiltrationTree::kMaxLevels, "observability.refine", "2K exceeds the level limit");
    require(tree.node_count(2 * levels) * grid.size() <= kMaxStoredValues, "observability.refine",
            "refined tree too large for the given grid");
  }
  static const std::set<std::string> targets_nc{"mean_shift", "zero_mean", "zero"};
  require(targets_nc.count(noncontrol_target) == 1, "noncontrol.target", "mean_shift, zero_mean or zero");
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::map<std::string, std::string> m;
  std::string ext, cnt;
  for (std::size_t i = 0; i < extents.size(); ++i)
    ext += (i ? ";" : "") + fmt(extents[i].first) + "," + fmt(extents[i].second);
  for (std::size_t i = 0; i < counts.size(); ++i) cnt += (i ? "," : "") + std::to_string(counts[i]);
  m["grid.extents"] = ext;
  m["grid.counts"] = cnt;
  m["tree.T"] = fmt(horizon);
  m["tree.K"] = std::to_string(levels);
  m["coeff.kind"] = coeff.kind;
  m["coeff.amplitude"] = fmt(coeff.amplitude);
  m["coeff.adapted"] = coeff.adapted ? "true" : "false";
  m["coeff.a2"] = fmt_complex(coeff.a2);
  m["coeff.a3"] = fmt_complex(coeff.a3);
  if (coeff.ia1_table) m["coeff.ia1.table"] = fmt_table(*coeff.ia1_table);
  if (coeff.a2_table) m["coeff.a2.table"] = fmt_table(*coeff.a2_table);
  if (coeff.a3_table) m["coeff.a3.table"] = fmt_table(*coeff.a3_table);
  m["weights.x0"] = fmt_list(x0);
  m["weights.sigma"] = sigma < 0.0 ? "auto" : fmt(sigma);
  m["weights.s"] = fmt(s);
  m["weights.lambda"] = fmt(lambda);
  m["carleman.s_values"] = fmt_list(s_values);
  m["carleman.lambda_values"] = fmt_list(lambda_values);
  m["carleman.times"] = std::to_string(carleman_times);
  m["carleman.cjk_samples"] = std::to_string(cjk_samples);
  m["carleman.functional_samples"] = std::to_string(functional_samples);
  m["control.tol"] = fmt(tol);
  m["control.max_iter"] = std::to_string(max_iter);
  m["control.targets"] = std::to_string(targets);
  m["control.target"] = target_kind;
  m["duality.samples"] = std::to_string(duality_samples);
  m["observability.samples"] = std::to_string(observability_samples);
  m["observability.refine"] = observability_refine ? "true" : "false";
  m["noncontrol.target"] = noncontrol_target;
  m["noncontrol.shift"] = fmt(noncontrol_shift);
  m["run.seed"] = std::to_string(seed);
  return m;
}

Grid ExperimentConfig::make_grid() const { return Grid::build(extents, counts); }

FiltrationTree ExperimentConfig::make_tree() const { return FiltrationTree::build(horizon, levels); }

FiltrationTree ExperimentConfig::make_tree(int levels_override) const {
  return FiltrationTree::build(horizon, levels_override);
}

ForwardCoefficients ExperimentConfig::make_coefficients(const Grid& grid, const FiltrationTree& tree) const {
  if (coeff.kind == "zero") return ForwardCoefficients::zero(grid, tree);
  if (coeff.kind == "unit_noise") return ForwardCoefficients::unit_noise(grid, tree);
  if (coeff.kind == "random") {
    RandomStream rng(seed, kCoefficientStream);
    return random_forward_coefficients(grid, tree, rng, coeff.amplitude, coeff.adapted);
  }
  auto f = ForwardCoefficients::zero(grid, tree);
  if (coeff.kind == "constant") {
    f.a2 = ComplexCoefficient::constant(grid, tree, coeff.a2);
    f.a3 = ComplexCoefficient::constant(grid, tree, coeff.a3);
    return f;
  }
  // table
  f.a2 = coeff.a2_table ? sample_table(grid, tree, *coeff.a2_table) : ComplexCoefficient::constant(grid, tree, coeff.a2);
  f.a3 = coeff.a3_table ? sample_table(grid, tree, *coeff.a3_table) : ComplexCoefficient::constant(grid, tree, coeff.a3);
  if (coeff.ia1_table) {
    const auto& t = *coeff.ia1_table;
    f.ia1[0] = RealCoefficient::deterministic(grid, tree, [&](double, const Point& x) { return t(x[0]).real(); });
  }
  return f;
}

}  // namespace sscontrol
