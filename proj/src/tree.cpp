#include "sscontrol/tree.hpp"

#include "sscontrol/errors.hpp"

#include <cmath>
#include <sstream>

namespace sscontrol {

FiltrationTree FiltrationTree::build(double horizon, int levels) {
  if (!std::isfinite(horizon) || !(horizon > 0.0))
    throw ConfigError("tree: horizon T must be positive", "tree.T");
  if (levels < 1 || levels > kMaxLevels) {
    std::ostringstream os;
    os << "tree: level count K must be in [1, " << kMaxLevels << "], got " << levels;
    throw ConfigError(os.str(), "tree.K");
  }
  FiltrationTree t;
  t.horizon_ = horizon;
  t.levels_ = levels;
  t.dt_ = horizon / levels;
  t.sqrt_dt_ = std::sqrt(t.dt_);
  return t;
}

double FiltrationTree::probability(int k) const { return std::ldexp(1.0, -k); }

double FiltrationTree::path_sum(int k, Eigen::Index node) const {
  // Bit (k-1-l) of the node index is the branch taken at step l.
  double b = 0.0;
  for (int l = 0; l < k; ++l) b += increment(static_cast<int>((node >> (k - 1 - l)) & 1));
  return b;
}

AdaptedField::AdaptedField(const FiltrationTree& tree, Eigen::Index rows, int first_level, int last_level)
    : first_(first_level), last_(last_level), rows_(rows) {
  if (first_level < 0 || last_level > tree.levels() || first_level > last_level)
    throw std::invalid_argument("AdaptedField: level range outside the tree");
  for (int k = first_level; k <= last_level; ++k)
    levels_.push_back(Eigen::MatrixXcd::Zero(rows, tree.node_count(k)));
}

Eigen::MatrixXcd& AdaptedField::level(int k) {
  if (!has_level(k)) throw std::out_of_range("AdaptedField: level " + std::to_string(k) + " not stored");
  return levels_[static_cast<std::size_t>(k - first_)];
}

const Eigen::MatrixXcd& AdaptedField::level(int k) const {
  if (!has_level(k)) throw std::out_of_range("AdaptedField: level " + std::to_string(k) + " not stored");
  return levels_[static_cast<std::size_t>(k - first_)];
}

bool AdaptedField::all_finite() const {
  for (const auto& m : levels_)
    if (!m.allFinite()) return false;
  return true;
}

bool AdaptedField::is_zero() const {
  for (const auto& m : levels_)
    if (!m.isZero(0.0)) return false;
  return true;
}

AdaptedField& AdaptedField::operator+=(const AdaptedField& other) {
  if (other.first_ != first_ || other.last_ != last_ || other.rows_ != rows_)
    throw std::invalid_argument("AdaptedField: shape mismatch in +=");
  for (std::size_t i = 0; i < levels_.size(); ++i) levels_[i] += other.levels_[i];
  return *this;
}

AdaptedField& AdaptedField::operator*=(cd scale) {
  for (auto& m : levels_) m *= scale;
  return *this;
}

MartingaleSplit martingale_representation(const Eigen::VectorXcd& up, const Eigen::VectorXcd& down, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("martingale_representation: dt must be positive");
  if (up.size() != down.size()) throw std::invalid_argument("martingale_representation: size mismatch");
  const double scale = 1.0 / (2.0 * std::sqrt(dt));
  return {0.5 * (up + down), scale * (up - down)};
}

Eigen::MatrixXcd conditional_expectation(const FiltrationTree& tree, const Eigen::MatrixXcd& child_level) {
  const Eigen::Index children = child_level.cols();
  if (children < 2 || (children & (children - 1)) != 0 || children > tree.node_count(tree.levels()))
    throw std::invalid_argument("conditional_expectation: column count is not a tree level width");
  Eigen::MatrixXcd parent(child_level.rows(), children / 2);
  for (Eigen::Index j = 0; j < parent.cols(); ++j)
    parent.col(j) = 0.5 * (child_level.col(2 * j) + child_level.col(2 * j + 1));
  return parent;
}

Eigen::MatrixXcd conditional_expectation(const FiltrationTree& tree, const AdaptedField& field, int k) {
  if (!field.has_level(k + 1))
    throw std::invalid_argument("conditional_expectation: field has no level " + std::to_string(k + 1));
  return conditional_expectation(tree, field.level(k + 1));
}

Eigen::VectorXcd expectation(const FiltrationTree& tree, const Eigen::MatrixXcd& level_values) {
  const Eigen::Index n = level_values.cols();
  if (n < 1 || (n & (n - 1)) != 0 || n > tree.node_count(tree.levels()))
    throw std::invalid_argument("expectation: column count is not a tree level width");
  // Pairwise reduction keeps the summation order fixed and matches the tower property.
  Eigen::MatrixXcd cur = level_values;
  while (cur.cols() > 1) cur = conditional_expectation(tree, cur);
  return cur.col(0);
}

Eigen::VectorXcd expectation(const FiltrationTree& tree, const AdaptedField& field, int k) {
  return expectation(tree, field.level(k));
}

double expected_norm_sq(const Grid& grid, const FiltrationTree& tree, const Eigen::MatrixXcd& level_values,
                        NormKind kind) {
  const Eigen::Index n = level_values.cols();
  if (n < 1 || n > tree.node_count(tree.levels())) throw std::invalid_argument("expected_norm_sq: bad level width");
  const double p = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) acc += grid.norm_sq(level_values.col(j), kind);
  return p * acc;
}

cd expected_inner(const Grid& grid, const FiltrationTree& tree, const Eigen::MatrixXcd& a,
                  const Eigen::MatrixXcd& b) {
  if (a.cols() != b.cols() || a.rows() != b.rows() || a.cols() > tree.node_count(tree.levels()))
    throw std::invalid_argument("expected_inner: shape mismatch");
  cd acc = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) acc += grid.inner(a.col(j), b.col(j));
  return acc / static_cast<double>(a.cols());
}

}  // namespace sscontrol
