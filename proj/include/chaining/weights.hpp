#pragma once

#include <cstddef>
#include <vector>

namespace chaining {

/// Probability mass function p = (p_k)_{k>=1} over levels.
///
/// Stored as an explicit prefix p_1..p_m followed by a geometric tail
/// p_k = tail_mass * (1 - q) * q^{k-m-1} for k > m. The default (dyadic) sequence
/// p_k = 2^{-k} is the empty prefix with tail_mass 1 and q = 1/2.
class WeightSequence {
 public:
  static constexpr double kSumTolerance = 1e-12;

  WeightSequence(std::vector<double> prefix, double tail_mass, double tail_ratio);

  static WeightSequence dyadic();
  /// Finitely supported sequence; p_k = 0 past the list.
  static WeightSequence from_list(std::vector<double> p);

  double operator()(std::size_t k) const;
  /// Sum of p_j over j > k.
  double mass_after(std::size_t k) const;

  std::size_t prefix_size() const { return prefix_.size(); }
  const std::vector<double>& prefix() const { return prefix_; }
  double tail_mass() const { return tail_mass_; }
  double tail_ratio() const { return tail_ratio_; }
  bool has_tail() const { return tail_mass_ > 0.0; }

  /// For k > prefix_size(): -ln p_k = intercept + slope * k. Requires has_tail().
  double log_intercept() const;
  double log_slope() const;

 private:
  std::vector<double> prefix_;
  double tail_mass_;
  double tail_ratio_;
};

}  // namespace chaining
