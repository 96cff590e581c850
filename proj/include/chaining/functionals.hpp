#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chaining/metric_space.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/vlc.hpp"
#include "chaining/weights.hpp"

namespace chaining {

inline constexpr double kDefaultTailTolerance = 1e-9;

/// A series value: the truncated sum plus a rigorous bound on the remainder,
/// `value` already including that bound.
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

/// Upper value of sum_{k >= k0} x^{k-1} sqrt(a + b k) for 0 < x < 1, b >= 0.
/// Terms are added explicitly until the remainder bound drops below `tol`.
SeriesValue sqrt_linear_geometric_series(double x, double a, double b, std::size_t k0,
                                         double tol = kDefaultTailTolerance);

/// I_mu(t) = int_0^diam sqrt(log2 1/mu(B(t, eps))) d eps, as an exact step sum.
double ft_functional(const MetricSpace& space, const ProbabilityMeasure& mu, std::size_t t);

/// M(mu, nu) = sum_t nu(t) I_mu(t) over the support of nu.
double m_functional(const MetricSpace& space, const ProbabilityMeasure& mu,
                    const ProbabilityMeasure& nu);

/// sum_{k>0} rho_{k-1} sqrt((l_k(t) + 1) ln 2 - ln p_k), rho_0 = diam(T).
SeriesValue sigma_bar(const VlcSequence& vlc, const WeightSequence& p, std::size_t t,
                      double tol = kDefaultTailTolerance);

/// sum_{k>0} rho_{k-1} sqrt(l_k(t)).
SeriesValue sigma_code(const VlcSequence& vlc, std::size_t t,
                       LengthChannel channel = LengthChannel::integer,
                       double tol = kDefaultTailTolerance);

/// sum_{k>0} rho_{k-1} sqrt((l_k(t) + 1) ln 2); dominates sigma_bar minus sigma_prime.
SeriesValue sigma_code_ln(const VlcSequence& vlc, std::size_t t,
                          double tol = kDefaultTailTolerance);

/// sum_{k>0} rho_{k-1} sqrt(ln(2 / p_k)); the same for every t.
SeriesValue sigma_prime(const VlcSequence& vlc, const WeightSequence& p,
                        double tol = kDefaultTailTolerance);

/// 2 sum_{k>0} r^{-k+1} sqrt(l_k(t) - l_{k-1}(t)). Throws AdmissibilityError on a decrease.
SeriesValue refinement_bound(const VlcSequence& vlc, std::size_t t,
                             LengthChannel channel = LengthChannel::integer);

/// sum_{k>0} r^{-k+1} sqrt(log2(mu(A_{k-1}(t)) / mu(A_k(t)))).
double bednorz_partition_bound(const PartitionTree& tree, const ProbabilityMeasure& mu,
                               std::size_t t);

/// sum_{k>0} r^{-k+1} sum_{B in A_{k-1}} mu(B) sqrt(H_{A_k|B}(mu)).
double entropy_chain_bound(const PartitionTree& tree, const ProbabilityMeasure& mu);

/// H_{A_k|B}(mu, nu) = -sum_{A child of B} mu(A|B) log2 nu(A|B), B a cell of level k-1.
double cross_entropy(const PartitionTree& tree, std::size_t k, std::size_t parent,
                     const ProbabilityMeasure& mu, const ProbabilityMeasure& nu);
double conditional_entropy(const PartitionTree& tree, std::size_t k, std::size_t parent,
                           const ProbabilityMeasure& mu);

/// sum_{k>0} r^{-k+1}, the slack term of the partition bounds.
double geometric_scale_sum(double r);

/// Per-point values of one functional with aggregate and provenance.
struct BoundReport {
  std::string functional;
  std::string construction;
  double r = 0.0;
  std::size_t depth = 0;
  std::vector<std::string> points;
  std::vector<double> values;
  std::vector<double> tail_bounds;
  double sup = 0.0;
  double tail_bound = 0.0;  // max over points

  /// Recomputes sup and tail_bound from the per-point columns.
  void finalize();
  std::size_t argmax() const;
};

/// Functional names accepted by evaluate_report.
/// ft | m | sigma-bar | sigma-code | sigma-prime | refinement | bednorz | entropy-chain
struct ReportInputs {
  const MetricSpace* space = nullptr;
  const ProbabilityMeasure* mu = nullptr;
  const ProbabilityMeasure* nu = nullptr;
  const PartitionTree* tree = nullptr;
  const VlcSequence* vlc = nullptr;
  const WeightSequence* p = nullptr;
  LengthChannel channel = LengthChannel::integer;
};

BoundReport evaluate_report(const std::string& functional, const ReportInputs& in);

}  // namespace chaining
