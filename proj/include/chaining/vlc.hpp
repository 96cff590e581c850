#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chaining/metric_space.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/weights.hpp"

namespace chaining {

enum class LengthChannel { integer, ideal };

/// Admissible sequence of variable-length codes {(pi_k, f_k)} over a partition tree.
///
/// Only code lengths are stored. Level 0 has the single root cell with length 0.
/// The integer channel holds the lengths of an actual prefix code; the ideal
/// channel holds the unrounded real lengths they were derived from. Past the
/// stored depth the last level repeats and both channels grow by
/// `tail_increment` per level.
class VlcSequence {
 public:
  VlcSequence(std::shared_ptr<const PartitionTree> tree, std::vector<std::vector<int>> lengths,
              std::vector<std::vector<double>> ideal, int tail_increment = 0,
              std::string construction = "custom");

  const PartitionTree& tree() const { return *tree_; }
  std::shared_ptr<const PartitionTree> tree_ptr() const { return tree_; }
  std::size_t depth() const { return tree_->depth(); }
  const std::string& construction() const { return construction_; }
  int tail_increment() const { return tail_increment_; }

  /// Length of f_k(pi_k(t)); valid for every k >= 0.
  int length(std::size_t k, std::size_t t) const;
  double ideal_length(std::size_t k, std::size_t t) const;
  double length(LengthChannel channel, std::size_t k, std::size_t t) const {
    return channel == LengthChannel::integer ? length(k, t) : ideal_length(k, t);
  }

  /// Per-cell lengths at stored level k.
  const std::vector<int>& level_lengths(std::size_t k) const { return lengths_.at(k); }
  const std::vector<double>& level_ideal(std::size_t k) const { return ideal_.at(k); }

  /// pi_k(t): representative of the level-k cell holding t.
  std::size_t projection(std::size_t k, std::size_t t) const {
    return tree_->cell_of(k, t).representative;
  }
  /// rho_k; rho_0 = diam(T).
  double resolution(std::size_t k) const { return tree_->resolution(k); }

 private:
  std::shared_ptr<const PartitionTree> tree_;
  std::vector<std::vector<int>> lengths_;
  std::vector<std::vector<double>> ideal_;
  int tail_increment_;
  std::string construction_;
};

/// Sum of 2^{-l}.
double kraft_sum(std::span<const int> lengths);
double kraft_sum(std::span<const double> lengths);

/// ceil(log2(1/w)); floored at 1 when `floor_at_one` (levels k >= 1).
std::vector<int> shannon_lengths(std::span<const double> weights, bool floor_at_one = true);

/// ceil() that treats values within 1e-10 of an integer as that integer.
int snapped_ceil(double x);

/// nu_{k+1}(.|B) for every cell B of level k, indexed [k][b] for k = 1..depth-1
/// (entry 0 unused). Each measure lives on the points of the space.
using ConditionalFamily = std::vector<std::vector<ProbabilityMeasure>>;

/// nu(.|B) uniform over the children of B, each child's mass spread evenly over its points.
ConditionalFamily uniform_conditionals(const PartitionTree& tree);
/// nu(.|B) = mu(.|B).
ConditionalFamily conditionals_from_measure(const PartitionTree& tree, const ProbabilityMeasure& mu);

/// The measures mu_1..mu_K of the recursion mu_{k+1} = sum_B nu_{k+1}(.|B) mu_k(B),
/// returned as entries 1..depth (entry 0 is mu_1 repeated for convenience).
std::vector<ProbabilityMeasure> chain_measures(const PartitionTree& tree,
                                               const ProbabilityMeasure& mu1,
                                               const ConditionalFamily& conditionals);

/// Mixture sum_k p_k mu_k, with mu_k = mu_K for k beyond the stored depth.
ProbabilityMeasure mixture_of_chain(const std::vector<ProbabilityMeasure>& chain,
                                    const WeightSequence& p);

/// Shannon codes for the recursively defined measures mu_k.
VlcSequence build_from_measures(std::shared_ptr<const PartitionTree> tree,
                                const ProbabilityMeasure& mu1,
                                const ConditionalFamily& conditionals);

/// labels[k][b] = L(A) for cell b at level k >= 1 (entry 0 unused).
using CellLabels = std::vector<std::vector<std::size_t>>;

/// Labels taken from the tree's child_index.
CellLabels child_index_labels(const PartitionTree& tree);

/// Codes whose refinements cost at most 2 log2 L + log2(pi^2/6) + 1 bits.
VlcSequence build_from_labeled_net(std::shared_ptr<const PartitionTree> tree,
                                   const CellLabels& labels);
VlcSequence build_from_labeled_net(std::shared_ptr<const PartitionTree> tree);

/// Level-k lengths ceil(log2(1/mu(A))).
VlcSequence build_from_single_measure(std::shared_ptr<const PartitionTree> tree,
                                      const ProbabilityMeasure& mu);

/// mu proportional to sum_k p_k sum_s 2^{-l_k(s)} delta_s over the representatives.
ProbabilityMeasure mixture_from_codes(const VlcSequence& vlc, const WeightSequence& p);

/// Kraft per level, monotone lengths, refinement-consistent idempotent projections,
/// lengths >= 1 past level 0, resolution reaching zero.
Diagnostics validate_admissible(const VlcSequence& vlc);
/// Also checks d(t, pi_k(t)) <= rho_k against the space.
Diagnostics validate_admissible(const VlcSequence& vlc, const MetricSpace& space);

/// Canonical prefix code words for one level, in cell order.
std::vector<std::string> canonical_codewords(std::span<const int> lengths);

}  // namespace chaining
