#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chaining/gaussian.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/vlc.hpp"

namespace chaining {

struct McConfig {
  std::size_t n = 20000;
  std::uint64_t seed = 0;
};

struct GreedyPartition {
  PartitionTree tree;
  /// Steps whose top two candidates had overlapping 95% intervals.
  std::vector<std::string> warnings;
};

/// Greedy partitioning driven by G(A) = E sup_{t in A} X_t.
///
/// At level k each parent B is split as B_0 = B; t_i maximizes
/// G(B(t, r^{-k-1}/2) cap B_{i-1}) over t in B_{i-1}; A_i = B(t_i, r^{-k}/2) cap B_{i-1}.
/// G is estimated from one shared matrix of draws (common random numbers); exact
/// ties go to the lexicographically smallest center.
GreedyPartition greedy_gaussian_partition(const GaussianModel& model, const MetricSpace& metric,
                                          double r, std::size_t max_depth, const McConfig& mc);

/// Ideal lengths l_k = l_{k-1} + 2 log2(i_k + 1) from the child indices; integer
/// lengths are their ceilings. A single child past the stored depth keeps adding 2.
VlcSequence assign_lower_codes(std::shared_ptr<const PartitionTree> tree);

struct LenDiffReport {
  std::vector<double> increments_sum;  // S(t) = sum_k r^{-k} sqrt(l_k(t) - l_{k-1}(t))
  McEstimate g_hat;                    // G(T)
  double c0 = 0.0;                     // diam(T)
  std::vector<double> ratios;          // S(t) / (G(T) + c0)
  double sup_ratio = 0.0;
  double sup_increments = 0.0;
};

/// S(t) from the ideal lengths against G(T) + diam(T).
LenDiffReport verify_len_diff(const GaussianModel& model, const VlcSequence& vlc, double r,
                              const McConfig& mc);

struct SudakovReport {
  std::size_t m = 0;
  double a = 0.0;
  double b = 0.0;  // largest distance from t_l to a member of H_l
  McEstimate g_union;
  std::vector<McEstimate> g_parts;
  double min_g_part = 0.0;
  double separation_term = 0.0;  // a sqrt(log2 m)
  double fitted_constant = 0.0;  // (G(H) - min_l G(H_l)) / (a sqrt(log2 m))
};

/// Diagnostic for the Sudakov-type minoration over an a-separated set of points.
/// `a` defaults to the smallest pairwise canonical distance; `parts` default to singletons.
SudakovReport sudakov_check(const GaussianModel& model, const PointSet& points,
                            std::optional<double> a, const std::vector<PointSet>& parts,
                            const McConfig& mc);

}  // namespace chaining
