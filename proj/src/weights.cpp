#include "chaining/weights.hpp"

#include <cmath>
#include <numeric>

#include "chaining/error.hpp"

namespace chaining {

WeightSequence::WeightSequence(std::vector<double> prefix, double tail_mass, double tail_ratio)
    : prefix_(std::move(prefix)), tail_mass_(tail_mass), tail_ratio_(tail_ratio) {
  for (double p : prefix_)
    if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError("level weights must be positive");
  if (!(tail_mass_ >= 0.0)) throw ParameterError("tail mass must be >= 0");
  if (tail_mass_ > 0.0 && !(tail_ratio_ > 0.0 && tail_ratio_ < 1.0))
    throw ParameterError("tail ratio must lie in (0, 1)");
  const double total = std::accumulate(prefix_.begin(), prefix_.end(), 0.0) + tail_mass_;
  if (std::abs(total - 1.0) > kSumTolerance) throw ParameterError("level weights must sum to 1");
}

WeightSequence WeightSequence::dyadic() { return WeightSequence({}, 1.0, 0.5); }

WeightSequence WeightSequence::from_list(std::vector<double> p) {
  return WeightSequence(std::move(p), 0.0, 0.5);
}

double WeightSequence::operator()(std::size_t k) const {
  if (k == 0) throw ParameterError("level weights are indexed from k = 1");
  if (k <= prefix_.size()) return prefix_[k - 1];
  if (tail_mass_ == 0.0) return 0.0;
  const double steps = static_cast<double>(k - prefix_.size() - 1);
  return tail_mass_ * (1.0 - tail_ratio_) * std::pow(tail_ratio_, steps);
}

double WeightSequence::mass_after(std::size_t k) const {
  if (k < prefix_.size()) {
    return std::accumulate(prefix_.begin() + static_cast<std::ptrdiff_t>(k), prefix_.end(), 0.0) +
           tail_mass_;
  }
  if (tail_mass_ == 0.0) return 0.0;
  return tail_mass_ * std::pow(tail_ratio_, static_cast<double>(k - prefix_.size()));
}

double WeightSequence::log_intercept() const {
  if (!has_tail()) throw DivergenceError("weight sequence has no tail");
  const double m = static_cast<double>(prefix_.size());
  return -std::log(tail_mass_ * (1.0 - tail_ratio_)) + (m + 1.0) * std::log(tail_ratio_);
}

double WeightSequence::log_slope() const {
  if (!has_tail()) throw DivergenceError("weight sequence has no tail");
  return -std::log(tail_ratio_);
}

}  // namespace chaining
