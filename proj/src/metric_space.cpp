#include "chaining/metric_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace chaining {

MetricSpace::MetricSpace(std::vector<std::string> labels, Eigen::MatrixXd dist)
    : labels_(std::move(labels)), dist_(std::move(dist)) {
  if (labels_.empty()) throw StructuralError("metric space needs at least one point");
  if (dist_.rows() != dist_.cols())
    throw StructuralError("distance matrix is not square");
  if (static_cast<std::size_t>(dist_.rows()) != labels_.size()) {
    std::ostringstream os;
    os << "distance matrix has " << dist_.rows() << " rows but " << labels_.size() << " labels";
    throw StructuralError(os.str());
  }
  if (!dist_.allFinite()) throw StructuralError("distance matrix has non-finite entries");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw StructuralError("duplicate label '" + labels_[i] + "'");
  }
  label_order_.resize(labels_.size());
  std::iota(label_order_.begin(), label_order_.end(), std::size_t{0});
  std::sort(label_order_.begin(), label_order_.end(),
            [this](std::size_t a, std::size_t b) { return labels_[a] < labels_[b]; });
}

MetricSpace MetricSpace::euclidean(const std::vector<std::vector<double>>& points,
                                   std::vector<std::string> labels) {
  const std::size_t n = points.size();
  if (n == 0) throw StructuralError("euclidean generator needs at least one point");
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw StructuralError("euclidean points have inconsistent dimensions");
  if (labels.empty()) {
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double diff = points[i][c] - points[j][c];
        s += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  }
  return MetricSpace(std::move(labels), std::move(d));
}

std::size_t MetricSpace::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) throw LookupError("unknown point '" + std::string(label) + "'");
  return it->second;
}

MetricSpace MetricSpace::subspace(std::span<const std::size_t> subset) const {
  std::vector<std::string> labels;
  Eigen::MatrixXd d(subset.size(), subset.size());
  for (std::size_t a = 0; a < subset.size(); ++a) {
    labels.push_back(labels_.at(subset[a]));
    for (std::size_t b = 0; b < subset.size(); ++b) d(a, b) = dist_(subset[a], subset[b]);
  }
  return MetricSpace(std::move(labels), std::move(d));
}

ProbabilityMeasure::ProbabilityMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw StructuralError("probability measure needs at least one weight");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw ParameterError("measure weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "measure weights sum to " << total << ", not 1";
    throw ParameterError(os.str());
  }
}

ProbabilityMeasure ProbabilityMeasure::uniform(std::size_t n) {
  if (n == 0) throw StructuralError("uniform measure on an empty set");
  return ProbabilityMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbabilityMeasure ProbabilityMeasure::dirac(std::size_t n, std::size_t at) {
  if (at >= n) throw LookupError("dirac atom outside the space");
  std::vector<double> w(n, 0.0);
  w[at] = 1.0;
  return ProbabilityMeasure(std::move(w));
}

ProbabilityMeasure ProbabilityMeasure::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ParameterError("measure weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ParameterError("measure has zero total mass");
  for (double& w : weights) w /= total;
  // Absorb the last rounding residue so the sum check cannot trip.
  const double residue = 1.0 - std::accumulate(weights.begin(), weights.end(), 0.0);
  auto largest = std::max_element(weights.begin(), weights.end());
  *largest += residue;
  return ProbabilityMeasure(std::move(weights));
}

double ProbabilityMeasure::mass(std::span<const std::size_t> points) const {
  double m = 0.0;
  for (std::size_t p : points) m += weights_.at(p);
  return m;
}

Diagnostics validate_metric(const MetricSpace& space) {
  Diagnostics out;
  const auto& d = space.matrix();
  const std::size_t n = space.size();
  auto name = [&](std::size_t i) { return space.label(i); };
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0)
      out.push_back({"diagonal", "d(" + name(i) + "," + name(i) + ") != 0"});
    for (std::size_t j = i + 1; j < n; ++j) {
      if (d(i, j) < 0.0 || d(j, i) < 0.0)
        out.push_back({"negative", "negative distance between " + name(i) + " and " + name(j)});
      if (std::abs(d(i, j) - d(j, i)) > kTriangleTolerance)
        out.push_back({"symmetry", "d(" + name(i) + "," + name(j) + ") != d(" + name(j) + "," +
                                       name(i) + ")"});
    }
  }
  // Each unordered endpoint pair (i, k) with intermediate j is reported once.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        const double excess = d(i, k) - (d(i, j) + d(j, k));
        if (excess > kTriangleTolerance) {
          std::ostringstream os;
          os.precision(17);
          os << "triangle (" << name(i) << "," << name(j) << "," << name(k) << "): d(" << name(i)
             << "," << name(k) << ")=" << d(i, k) << " > " << d(i, j) + d(j, k);
          out.push_back({"triangle", os.str()});
        }
      }
    }
  }
  return out;
}

PointSet ball(const MetricSpace& space, std::size_t center, double radius) {
  if (center >= space.size()) throw LookupError("ball center outside the space");
  if (!(radius >= 0.0)) throw ParameterError("ball radius must be >= 0");
  PointSet out;
  for (std::size_t s = 0; s < space.size(); ++s)
    if (space(center, s) <= radius) out.push_back(s);
  return out;
}

PointSet ball(const MetricSpace& space, std::string_view center, double radius) {
  return ball(space, space.index_of(center), radius);
}

double diameter(const MetricSpace& space) { return space.matrix().maxCoeff(); }

double diameter(const MetricSpace& space, std::span<const std::size_t> subset) {
  double best = 0.0;
  for (std::size_t a = 0; a < subset.size(); ++a)
    for (std::size_t b = a + 1; b < subset.size(); ++b)
      best = std::max(best, space(subset[a], subset[b]));
  return best;
}

MetricSpace normalize_diameter(const MetricSpace& space) {
  const double diam = diameter(space);
  if (!(diam > 0.0)) throw DegenerateSpaceError("cannot normalize a space of zero diameter");
  return MetricSpace(space.labels(), space.matrix() / diam);
}

std::size_t greedy_covering_number(const MetricSpace& space, std::span<const std::size_t> subset,
                                   double eps) {
  if (!(eps >= 0.0)) throw ParameterError("covering radius must be >= 0");
  std::vector<bool> covered(subset.size(), false);
  std::size_t remaining = subset.size();
  std::size_t count = 0;
  while (remaining > 0) {
    std::size_t best_center = 0;
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < subset.size(); ++c) {
      std::size_t gain = 0;
      for (std::size_t s = 0; s < subset.size(); ++s)
        if (!covered[s] && space(subset[c], subset[s]) <= eps) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best_center = c;
      }
    }
    for (std::size_t s = 0; s < subset.size(); ++s) {
      if (!covered[s] && space(subset[best_center], subset[s]) <= eps) {
        covered[s] = true;
        --remaining;
      }
    }
    ++count;
  }
  return count;
}

namespace {

// Exact set cover over at most 20 points; branches on the centers that cover the
// lowest uncovered point.
class ExactCover {
 public:
  ExactCover(std::vector<std::uint32_t> masks, std::size_t upper)
      : masks_(std::move(masks)), best_(upper) {
    for (auto m : masks_) max_gain_ = std::max<std::size_t>(max_gain_, std::popcount(m));
    full_ = masks_.size() == 32 ? ~0u : ((1u << masks_.size()) - 1u);
  }

  std::size_t solve() {
    search(0u, 0);
    return best_;
  }

 private:
  void search(std::uint32_t covered, std::size_t used) {
    if (covered == full_) {
      best_ = std::min(best_, used);
      return;
    }
    const std::size_t uncovered = std::popcount(full_ & ~covered);
    const std::size_t lower = used + (uncovered + max_gain_ - 1) / max_gain_;
    if (lower >= best_) return;
    const int point = std::countr_zero(full_ & ~covered);
    for (std::size_t c = 0; c < masks_.size(); ++c)
      if (masks_[c] & (1u << point)) search(covered | masks_[c], used + 1);
  }

  std::vector<std::uint32_t> masks_;
  std::size_t best_;
  std::size_t max_gain_ = 1;
  std::uint32_t full_ = 0;
};

}  // namespace

CoveringNumber covering_number(const MetricSpace& space, std::span<const std::size_t> subset,
                               double eps) {
  if (!(eps >= 0.0)) throw ParameterError("covering radius must be >= 0");
  if (subset.empty()) return {0, true};
  const std::size_t greedy = greedy_covering_number(space, subset, eps);
  if (subset.size() > kExactCoveringCutoff) return {greedy, false};
  std::vector<std::uint32_t> masks(subset.size(), 0u);
  for (std::size_t c = 0; c < subset.size(); ++c)
    for (std::size_t s = 0; s < subset.size(); ++s)
      if (space(subset[c], subset[s]) <= eps) masks[c] |= 1u << s;
  return {ExactCover(std::move(masks), greedy).solve(), true};
}

CoveringNumber covering_number(const MetricSpace& space, double eps) {
  PointSet all(space.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return covering_number(space, all, eps);
}

}  // namespace chaining
