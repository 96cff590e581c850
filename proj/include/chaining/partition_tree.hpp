#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "chaining/metric_space.hpp"

namespace chaining {

inline constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

struct Cell {
  PointSet members;                  // sorted point indices
  std::size_t representative = 0;    // s_A, a member of the cell
  std::size_t parent = kNoParent;    // index into the previous level
  std::size_t child_index = 0;       // 1-based position among its siblings; 0 = unset
};

/// Increasing sequence of partitions A_0 = {T}, A_1, ..., A_K with scale ratio r.
///
/// Levels deeper than the stored depth repeat the last level. When the tree is
/// `terminal` every last-level cell has diameter zero, so the repetition is exact.
class PartitionTree {
 public:
  PartitionTree(double ratio, std::size_t num_points, std::vector<std::vector<Cell>> levels,
                bool terminal, double root_diameter = 1.0);

  double ratio() const { return ratio_; }
  std::size_t num_points() const { return num_points_; }
  std::size_t depth() const { return levels_.size() - 1; }
  bool terminal() const { return terminal_; }
  /// diam(T), the resolution attached to level 0.
  double root_diameter() const { return root_diameter_; }

  /// Level k clamped to the stored depth.
  const std::vector<Cell>& level(std::size_t k) const;
  const std::vector<std::vector<Cell>>& levels() const { return levels_; }

  /// Index within level(k) of the cell holding t. Throws ParameterError on bad t.
  std::size_t cell_index(std::size_t k, std::size_t t) const;
  const Cell& cell_of(std::size_t k, std::size_t t) const;

  /// Indices (into level k+1) of the children of cell `b` at level k.
  const std::vector<std::size_t>& children(std::size_t k, std::size_t b) const;

  /// Resolution r^{-k} for k >= 1 and root_diameter() at k = 0.
  double resolution(std::size_t k) const;

 private:
  double ratio_;
  std::size_t num_points_;
  std::vector<std::vector<Cell>> levels_;
  bool terminal_;
  double root_diameter_;
  std::vector<std::vector<std::size_t>> point_cell_;             // [k][t]
  std::vector<std::vector<std::vector<std::size_t>>> children_;  // [k][b]
};

/// Ball carving at radius r^{-k}/2 around lexicographically first remaining
/// points, each cell extended by nearby points while its diameter stays <= r^{-k}.
PartitionTree build_radial_partitions(const MetricSpace& space, double r, std::size_t max_depth);

/// Empty iff the tree is a nested family of partitions with diam <= r^{-k} at level k.
Diagnostics validate_tree(const PartitionTree& tree, const MetricSpace& space);

}  // namespace chaining
