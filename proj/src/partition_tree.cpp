#include "chaining/partition_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

namespace chaining {

namespace {
constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
constexpr double kDiameterTolerance = 1e-12;
}  // namespace

PartitionTree::PartitionTree(double ratio, std::size_t num_points,
                             std::vector<std::vector<Cell>> levels, bool terminal,
                             double root_diameter)
    : ratio_(ratio),
      num_points_(num_points),
      levels_(std::move(levels)),
      terminal_(terminal),
      root_diameter_(root_diameter) {
  if (!(ratio_ > 1.0)) throw ParameterError("partition ratio r must exceed 1");
  if (levels_.empty()) throw StructuralError("partition tree needs level 0");
  if (num_points_ == 0) throw StructuralError("partition tree over an empty set");
  point_cell_.assign(levels_.size(), std::vector<std::size_t>(num_points_, kUnassigned));
  children_.resize(levels_.size());
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    auto& cells = levels_[k];
    children_[k].resize(cells.size());
    for (std::size_t b = 0; b < cells.size(); ++b) {
      auto& members = cells[b].members;
      std::sort(members.begin(), members.end());
      for (std::size_t t : members) {
        if (t >= num_points_) throw StructuralError("cell member outside the point set");
        if (point_cell_[k][t] == kUnassigned) point_cell_[k][t] = b;
      }
    }
    if (k == 0) continue;
    for (std::size_t b = 0; b < cells.size(); ++b) {
      const std::size_t parent = cells[b].parent;
      if (parent < levels_[k - 1].size()) children_[k - 1][parent].push_back(b);
    }
  }
  // Sibling lists follow child_index order where it is set.
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
    for (auto& kids : children_[k]) {
      std::stable_sort(kids.begin(), kids.end(), [&](std::size_t a, std::size_t b) {
        return levels_[k + 1][a].child_index < levels_[k + 1][b].child_index;
      });
    }
  }
}

const std::vector<Cell>& PartitionTree::level(std::size_t k) const {
  return levels_[std::min(k, depth())];
}

std::size_t PartitionTree::cell_index(std::size_t k, std::size_t t) const {
  if (t >= num_points_) throw ParameterError("point index outside the tree");
  const std::size_t b = point_cell_[std::min(k, depth())][t];
  if (b == kUnassigned) throw StructuralError("point not covered by any cell at this level");
  return b;
}

const Cell& PartitionTree::cell_of(std::size_t k, std::size_t t) const {
  return level(k)[cell_index(k, t)];
}

const std::vector<std::size_t>& PartitionTree::children(std::size_t k, std::size_t b) const {
  static const std::vector<std::size_t> kNone;
  if (k >= depth()) return kNone;
  return children_[k].at(b);
}

double PartitionTree::resolution(std::size_t k) const {
  if (k == 0) return root_diameter_;
  return std::pow(ratio_, -static_cast<double>(k));
}

namespace {

// Cells of one parent at scale `rho`: ball of radius rho/2 around the first
// remaining point (label order), then any remaining point within rho of the center
// whose addition keeps the diameter <= rho, scanned by distance.
std::vector<Cell> carve(const MetricSpace& space, const PointSet& parent, std::size_t parent_index,
                        double rho) {
  const auto& order = space.label_order();
  std::vector<std::size_t> rank(space.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

  std::vector<std::size_t> remaining = parent;
  std::sort(remaining.begin(), remaining.end(),
            [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });

  std::vector<Cell> out;
  while (!remaining.empty()) {
    const std::size_t center = remaining.front();
    std::vector<std::size_t> candidates;
    for (std::size_t p : remaining)
      if (p != center && space(center, p) <= rho) candidates.push_back(p);
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return space(center, a) < space(center, b);
    });
    PointSet members{center};
    for (std::size_t p : candidates) {
      bool fits = space(center, p) <= rho / 2.0;
      if (!fits) {
        fits = true;
        for (std::size_t m : members) {
          if (space(m, p) > rho) {
            fits = false;
            break;
          }
        }
      }
      if (fits) members.push_back(p);
    }
    std::sort(members.begin(), members.end());
    std::erase_if(remaining, [&](std::size_t p) {
      return std::binary_search(members.begin(), members.end(), p);
    });
    Cell cell;
    cell.members = std::move(members);
    cell.representative = center;
    cell.parent = parent_index;
    cell.child_index = out.size() + 1;
    out.push_back(std::move(cell));
  }
  return out;
}

bool all_zero_diameter(const MetricSpace& space, const std::vector<Cell>& cells) {
  return std::all_of(cells.begin(), cells.end(),
                     [&](const Cell& c) { return diameter(space, c.members) == 0.0; });
}

}  // namespace

PartitionTree build_radial_partitions(const MetricSpace& space, double r, std::size_t max_depth) {
  if (!(r >= 2.0)) throw ParameterError("partition ratio r must be >= 2");
  if (max_depth < 1) throw ParameterError("max_depth must be >= 1");
  const double diam = diameter(space);
  if (diam > 1.0 + kDiameterTolerance)
    throw ParameterError("space must be normalized to diameter <= 1 before partitioning");

  PointSet all(space.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Cell root;
  root.members = all;
  root.representative = space.label_order().front();
  root.child_index = 1;
  std::vector<std::vector<Cell>> levels{{root}};

  bool terminal = false;
  for (std::size_t k = 1; k <= max_depth; ++k) {
    const double rho = std::pow(r, -static_cast<double>(k));
    std::vector<Cell> next;
    const auto& prev = levels.back();
    for (std::size_t b = 0; b < prev.size(); ++b) {
      auto kids = carve(space, prev[b].members, b, rho);
      for (auto& c : kids) next.push_back(std::move(c));
    }
    levels.push_back(std::move(next));
    if (all_zero_diameter(space, levels.back())) {
      terminal = true;
      break;
    }
  }
  return PartitionTree(r, space.size(), std::move(levels), terminal, diam);
}

Diagnostics validate_tree(const PartitionTree& tree, const MetricSpace& space) {
  Diagnostics out;
  const std::size_t n = space.size();
  if (tree.num_points() != n) {
    out.push_back({"size", "tree covers " + std::to_string(tree.num_points()) +
                               " points but the space has " + std::to_string(n)});
    return out;
  }
  const auto& levels = tree.levels();
  if (levels[0].size() != 1 || levels[0][0].members.size() != n)
    out.push_back({"root", "level 0 must be the single cell T"});

  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& cells = levels[k];
    const double bound = std::pow(tree.ratio(), -static_cast<double>(k));
    std::vector<int> hits(n, 0);
    for (std::size_t b = 0; b < cells.size(); ++b) {
      const Cell& c = cells[b];
      const std::string where = "level " + std::to_string(k) + " cell " + std::to_string(b);
      if (c.members.empty()) out.push_back({"empty", where + " is empty"});
      for (std::size_t t : c.members) ++hits[t];
      if (!std::binary_search(c.members.begin(), c.members.end(), c.representative))
        out.push_back({"representative", where + " representative is not a member"});
      const double diam = diameter(space, c.members);
      if (diam > bound + kDiameterTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << where << " has diameter " << diam << " > r^-k = " << bound;
        out.push_back({"diameter", os.str()});
      }
      if (k == 0) continue;
      if (c.parent >= levels[k - 1].size()) {
        out.push_back({"nesting", where + " has no valid parent"});
        continue;
      }
      const auto& pm = levels[k - 1][c.parent].members;
      if (!std::includes(pm.begin(), pm.end(), c.members.begin(), c.members.end()))
        out.push_back({"nesting", where + " is not contained in its parent"});
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (hits[t] == 0)
        out.push_back({"cover", "level " + std::to_string(k) + " misses point " + space.label(t)});
      else if (hits[t] > 1)
        out.push_back({"disjoint", "level " + std::to_string(k) + " has point " + space.label(t) +
                                       " in several cells"});
    }
    if (k + 1 < levels.size()) {
      for (std::size_t b = 0; b < cells.size(); ++b) {
        std::set<std::size_t> labels;
        std::size_t m = 0;
        for (const Cell& child : levels[k + 1]) {
          if (child.parent != b) continue;
          ++m;
          labels.insert(child.child_index);
        }
        bool ok = labels.size() == m;
        std::size_t expect = 1;
        for (std::size_t l : labels) ok = ok && (l == expect++);
        if (!ok)
          out.push_back({"child_index", "children of level " + std::to_string(k) + " cell " +
                                            std::to_string(b) + " are not labeled 1..m"});
      }
    }
  }
  if (tree.terminal()) {
    for (const Cell& c : levels.back())
      if (diameter(space, c.members) > 0.0) {
        out.push_back({"terminal", "terminal tree has a last-level cell of positive diameter"});
        break;
      }
  }
  return out;
}

}  // namespace chaining
