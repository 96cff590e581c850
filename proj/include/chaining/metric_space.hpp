#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "chaining/error.hpp"

namespace chaining {

/// Sorted list of point indices into a MetricSpace.
using PointSet = std::vector<std::size_t>;

/// Finite metric space (T, d) stored as a dense distance matrix.
///
/// Construction checks structure only (square, label count, finiteness, unique
/// labels); the metric axioms are checked by validate_metric so that non-metric
/// inputs can be reported rather than rejected.
class MetricSpace {
 public:
  MetricSpace(std::vector<std::string> labels, Eigen::MatrixXd dist);

  /// Distances between rows of `points` (Euclidean norm). Labels default to "p0", "p1", ...
  static MetricSpace euclidean(const std::vector<std::vector<double>>& points,
                               std::vector<std::string> labels = {});

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::size_t index_of(std::string_view label) const;

  double operator()(std::size_t i, std::size_t j) const { return dist_(i, j); }
  const Eigen::MatrixXd& matrix() const { return dist_; }

  /// Point indices ordered by label (the lexicographic order used by the builders).
  const std::vector<std::size_t>& label_order() const { return label_order_; }

  /// Restriction of the metric to `subset`, labels kept.
  MetricSpace subspace(std::span<const std::size_t> subset) const;

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd dist_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> label_order_;
};

/// Probability vector aligned with a MetricSpace's points.
class ProbabilityMeasure {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit ProbabilityMeasure(std::vector<double> weights);

  static ProbabilityMeasure uniform(std::size_t n);
  static ProbabilityMeasure dirac(std::size_t n, std::size_t at);
  /// Divides by the total; throws ParameterError for negative entries or zero total.
  static ProbabilityMeasure normalized(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double mass(std::span<const std::size_t> points) const;

 private:
  std::vector<double> weights_;
};

inline constexpr double kTriangleTolerance = 1e-9;

/// Zero diagonal, symmetry, nonnegativity and triangle inequality (tolerance 1e-9).
Diagnostics validate_metric(const MetricSpace& space);

/// Closed ball { s : d(center, s) <= radius }.
PointSet ball(const MetricSpace& space, std::size_t center, double radius);
PointSet ball(const MetricSpace& space, std::string_view center, double radius);

double diameter(const MetricSpace& space);
double diameter(const MetricSpace& space, std::span<const std::size_t> subset);

MetricSpace normalize_diameter(const MetricSpace& space);

struct CoveringNumber {
  std::size_t count = 0;
  bool exact = false;  // false: greedy upper bound
};

inline constexpr std::size_t kExactCoveringCutoff = 20;

/// Minimal number of closed eps-balls (centers in the space) covering it.
/// Exact by branch-and-bound up to 20 points, greedy upper bound above.
CoveringNumber covering_number(const MetricSpace& space, double eps);

/// Covering number of `subset` with centers restricted to `subset`.
CoveringNumber covering_number(const MetricSpace& space, std::span<const std::size_t> subset,
                               double eps);

/// Greedy cover size, always an upper bound on the exact value.
std::size_t greedy_covering_number(const MetricSpace& space, std::span<const std::size_t> subset,
                                   double eps);

}  // namespace chaining
