#include "chaining/vlc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <sstream>

namespace chaining {

namespace {
constexpr double kKraftTolerance = 1e-12;
constexpr double kMassTolerance = 1e-12;
}  // namespace

VlcSequence::VlcSequence(std::shared_ptr<const PartitionTree> tree,
                         std::vector<std::vector<int>> lengths,
                         std::vector<std::vector<double>> ideal, int tail_increment,
                         std::string construction)
    : tree_(std::move(tree)),
      lengths_(std::move(lengths)),
      ideal_(std::move(ideal)),
      tail_increment_(tail_increment),
      construction_(std::move(construction)) {
  if (!tree_) throw StructuralError("code sequence without a partition tree");
  if (tree_->depth() < 1) throw StructuralError("code sequence needs at least one level past the root");
  if (lengths_.size() != tree_->depth() + 1 || ideal_.size() != lengths_.size())
    throw StructuralError("code lengths must cover levels 0..depth");
  for (std::size_t k = 0; k < lengths_.size(); ++k) {
    const std::size_t cells = tree_->levels()[k].size();
    if (lengths_[k].size() != cells || ideal_[k].size() != cells)
      throw StructuralError("level " + std::to_string(k) + " lengths do not match its cells");
  }
  if (tail_increment_ < 0) throw StructuralError("tail increment must be >= 0");
}

int VlcSequence::length(std::size_t k, std::size_t t) const {
  const std::size_t depth = tree_->depth();
  const int base = lengths_[std::min(k, depth)][tree_->cell_index(k, t)];
  if (k <= depth) return base;
  return base + tail_increment_ * static_cast<int>(k - depth);
}

double VlcSequence::ideal_length(std::size_t k, std::size_t t) const {
  const std::size_t depth = tree_->depth();
  const double base = ideal_[std::min(k, depth)][tree_->cell_index(k, t)];
  if (k <= depth) return base;
  return base + tail_increment_ * static_cast<double>(k - depth);
}

double kraft_sum(std::span<const int> lengths) {
  double s = 0.0;
  for (int l : lengths) s += std::ldexp(1.0, -l);
  return s;
}

double kraft_sum(std::span<const double> lengths) {
  double s = 0.0;
  for (double l : lengths) s += std::exp2(-l);
  return s;
}

int snapped_ceil(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-10) return static_cast<int>(nearest);
  return static_cast<int>(std::ceil(x));
}

std::vector<int> shannon_lengths(std::span<const double> weights, bool floor_at_one) {
  std::vector<int> out;
  out.reserve(weights.size());
  for (double w : weights) {
    if (!(w > 0.0)) throw InfiniteLengthError("zero-weight cell has infinite code length");
    int l = snapped_ceil(-std::log2(w));
    if (l < 0) l = 0;
    if (floor_at_one) l = std::max(l, 1);
    out.push_back(l);
  }
  return out;
}

namespace {

std::vector<double> cell_masses(const std::vector<Cell>& cells, const ProbabilityMeasure& mu) {
  std::vector<double> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) out.push_back(mu.mass(c.members));
  return out;
}

std::vector<double> ideal_of(const std::vector<double>& masses) {
  std::vector<double> out;
  out.reserve(masses.size());
  for (double m : masses) {
    if (!(m > 0.0)) throw InfiniteLengthError("zero-mass cell has infinite code length");
    out.push_back(std::max(0.0, -std::log2(m)));
  }
  return out;
}

// Point measure giving each listed cell its mass spread evenly over its members.
ProbabilityMeasure spread_over_cells(std::size_t n, const std::vector<Cell>& cells,
                                     std::span<const std::size_t> which,
                                     std::span<const double> masses) {
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < which.size(); ++i) {
    const Cell& c = cells[which[i]];
    for (std::size_t t : c.members) w[t] += masses[i] / static_cast<double>(c.members.size());
  }
  return ProbabilityMeasure::normalized(std::move(w));
}

void check_measure_size(const PartitionTree& tree, const ProbabilityMeasure& mu) {
  if (mu.size() != tree.num_points())
    throw StructuralError("measure size does not match the tree's point count");
}

}  // namespace

ConditionalFamily uniform_conditionals(const PartitionTree& tree) {
  ConditionalFamily out(tree.depth());
  for (std::size_t k = 1; k < tree.depth(); ++k) {
    const auto& next = tree.levels()[k + 1];
    for (std::size_t b = 0; b < tree.levels()[k].size(); ++b) {
      const auto& kids = tree.children(k, b);
      if (kids.empty()) throw StructuralError("cell without children");
      std::vector<double> masses(kids.size(), 1.0 / static_cast<double>(kids.size()));
      out[k].push_back(spread_over_cells(tree.num_points(), next, kids, masses));
    }
  }
  return out;
}

ConditionalFamily conditionals_from_measure(const PartitionTree& tree, const ProbabilityMeasure& mu) {
  check_measure_size(tree, mu);
  ConditionalFamily out(tree.depth());
  for (std::size_t k = 1; k < tree.depth(); ++k) {
    for (const Cell& b : tree.levels()[k]) {
      std::vector<double> w(tree.num_points(), 0.0);
      for (std::size_t t : b.members) w[t] = mu[t];
      out[k].push_back(ProbabilityMeasure::normalized(std::move(w)));
    }
  }
  return out;
}

std::vector<ProbabilityMeasure> chain_measures(const PartitionTree& tree,
                                               const ProbabilityMeasure& mu1,
                                               const ConditionalFamily& conditionals) {
  check_measure_size(tree, mu1);
  const std::size_t depth = tree.depth();
  if (conditionals.size() < depth) throw StructuralError("conditional family is missing levels");
  for (double m : cell_masses(tree.levels()[1], mu1))
    if (!(m > 0.0)) throw InfiniteLengthError("mu_1 vanishes on a level-1 cell");

  std::vector<ProbabilityMeasure> chain{mu1, mu1};
  for (std::size_t k = 1; k < depth; ++k) {
    const auto& cells = tree.levels()[k];
    if (conditionals[k].size() != cells.size())
      throw StructuralError("level " + std::to_string(k) + " conditionals do not match its cells");
    const ProbabilityMeasure& prev = chain.back();
    std::vector<double> next(tree.num_points(), 0.0);
    for (std::size_t b = 0; b < cells.size(); ++b) {
      const ProbabilityMeasure& nu = conditionals[k][b];
      check_measure_size(tree, nu);
      const auto& members = cells[b].members;
      double outside = 0.0;
      for (std::size_t t = 0; t < nu.size(); ++t)
        if (!std::binary_search(members.begin(), members.end(), t)) outside += nu[t];
      if (outside > kMassTolerance)
        throw StructuralError("conditional for level " + std::to_string(k) + " cell " +
                              std::to_string(b) + " puts mass outside its parent");
      for (std::size_t kid : tree.children(k, b)) {
        if (!(nu.mass(tree.levels()[k + 1][kid].members) > 0.0))
          throw InfiniteLengthError("conditional vanishes on a child cell");
      }
      const double parent_mass = prev.mass(members);
      for (std::size_t t : members) next[t] += nu[t] * parent_mass;
    }
    chain.push_back(ProbabilityMeasure::normalized(std::move(next)));
  }
  return chain;
}

ProbabilityMeasure mixture_of_chain(const std::vector<ProbabilityMeasure>& chain,
                                    const WeightSequence& p) {
  if (chain.size() < 2) throw StructuralError("empty measure chain");
  const std::size_t depth = chain.size() - 1;
  std::vector<double> w(chain[1].size(), 0.0);
  for (std::size_t k = 1; k <= depth; ++k) {
    const double pk = p(k);
    for (std::size_t t = 0; t < w.size(); ++t) w[t] += pk * chain[k][t];
  }
  const double rest = p.mass_after(depth);
  for (std::size_t t = 0; t < w.size(); ++t) w[t] += rest * chain[depth][t];
  return ProbabilityMeasure::normalized(std::move(w));
}

VlcSequence build_from_measures(std::shared_ptr<const PartitionTree> tree,
                                const ProbabilityMeasure& mu1,
                                const ConditionalFamily& conditionals) {
  const auto chain = chain_measures(*tree, mu1, conditionals);
  std::vector<std::vector<int>> lengths{{0}};
  std::vector<std::vector<double>> ideal{{0.0}};
  for (std::size_t k = 1; k <= tree->depth(); ++k) {
    const auto masses = cell_masses(tree->levels()[k], chain[k]);
    lengths.push_back(shannon_lengths(masses));
    ideal.push_back(ideal_of(masses));
  }
  return VlcSequence(std::move(tree), std::move(lengths), std::move(ideal), 0, "measures");
}

CellLabels child_index_labels(const PartitionTree& tree) {
  CellLabels out(tree.depth() + 1);
  for (std::size_t k = 1; k <= tree.depth(); ++k)
    for (const Cell& c : tree.levels()[k]) out[k].push_back(c.child_index);
  return out;
}

namespace {

void check_labels(const PartitionTree& tree, const CellLabels& labels) {
  if (labels.size() != tree.depth() + 1) throw StructuralError("labels must cover levels 1..depth");
  for (std::size_t k = 1; k <= tree.depth(); ++k) {
    if (labels[k].size() != tree.levels()[k].size())
      throw StructuralError("level " + std::to_string(k) + " labels do not match its cells");
    for (std::size_t b = 0; b < tree.levels()[k - 1].size(); ++b) {
      const auto& kids = tree.children(k - 1, b);
      std::vector<std::size_t> seen;
      for (std::size_t kid : kids) seen.push_back(labels[k][kid]);
      std::sort(seen.begin(), seen.end());
      for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i] != i + 1)
          throw StructuralError("sibling labels under level " + std::to_string(k - 1) + " cell " +
                                std::to_string(b) + " are not exactly 1..m");
    }
  }
}

// 6 / (pi^2 L^2) per sibling, slack spread evenly so the masses sum to one.
std::vector<double> completed_label_masses(const std::vector<std::size_t>& kids,
                                           const std::vector<std::size_t>& level_labels) {
  const double c = 6.0 / (std::numbers::pi * std::numbers::pi);
  std::vector<double> masses;
  double total = 0.0;
  for (std::size_t kid : kids) {
    const double l = static_cast<double>(level_labels[kid]);
    masses.push_back(c / (l * l));
    total += masses.back();
  }
  const double slack = (1.0 - total) / static_cast<double>(kids.size());
  for (double& m : masses) m += slack;
  return masses;
}

}  // namespace

VlcSequence build_from_labeled_net(std::shared_ptr<const PartitionTree> tree,
                                   const CellLabels& labels) {
  check_labels(*tree, labels);
  const std::size_t n = tree->num_points();
  const auto& roots = tree->children(0, 0);
  const ProbabilityMeasure mu1 =
      spread_over_cells(n, tree->levels()[1], roots, completed_label_masses(roots, labels[1]));
  ConditionalFamily conditionals(tree->depth());
  for (std::size_t k = 1; k < tree->depth(); ++k) {
    for (std::size_t b = 0; b < tree->levels()[k].size(); ++b) {
      const auto& kids = tree->children(k, b);
      conditionals[k].push_back(spread_over_cells(n, tree->levels()[k + 1], kids,
                                                  completed_label_masses(kids, labels[k + 1])));
    }
  }
  VlcSequence built = build_from_measures(tree, mu1, conditionals);
  std::vector<std::vector<int>> lengths;
  std::vector<std::vector<double>> ideal;
  for (std::size_t k = 0; k <= tree->depth(); ++k) {
    lengths.push_back(built.level_lengths(k));
    ideal.push_back(built.level_ideal(k));
  }
  return VlcSequence(std::move(tree), std::move(lengths), std::move(ideal), 0, "labeled-net");
}

VlcSequence build_from_labeled_net(std::shared_ptr<const PartitionTree> tree) {
  const CellLabels labels = child_index_labels(*tree);
  return build_from_labeled_net(std::move(tree), labels);
}

VlcSequence build_from_single_measure(std::shared_ptr<const PartitionTree> tree,
                                      const ProbabilityMeasure& mu) {
  check_measure_size(*tree, mu);
  std::vector<std::vector<int>> lengths{{0}};
  std::vector<std::vector<double>> ideal{{0.0}};
  for (std::size_t k = 1; k <= tree->depth(); ++k) {
    const auto masses = cell_masses(tree->levels()[k], mu);
    for (double m : masses)
      if (!(m > 0.0)) throw InfiniteLengthError("measure vanishes on a cell at level " + std::to_string(k));
    lengths.push_back(shannon_lengths(masses));
    ideal.push_back(ideal_of(masses));
  }
  return VlcSequence(std::move(tree), std::move(lengths), std::move(ideal), 0, "single-measure");
}

ProbabilityMeasure mixture_from_codes(const VlcSequence& vlc, const WeightSequence& p) {
  const PartitionTree& tree = vlc.tree();
  const std::size_t depth = tree.depth();
  std::vector<double> w(tree.num_points(), 0.0);
  for (std::size_t k = 1; k <= depth; ++k) {
    const double pk = p(k);
    const auto& cells = tree.levels()[k];
    for (std::size_t b = 0; b < cells.size(); ++b)
      w[cells[b].representative] += pk * std::ldexp(1.0, -vlc.level_lengths(k)[b]);
  }
  // Levels past the stored depth reuse the last level's cells.
  const auto& last = tree.levels()[depth];
  for (std::size_t k = depth + 1; p.mass_after(k - 1) > 1e-18 && k < depth + 4096; ++k) {
    const double pk = p(k);
    const int extra = vlc.tail_increment() * static_cast<int>(k - depth);
    for (std::size_t b = 0; b < last.size(); ++b)
      w[last[b].representative] += pk * std::ldexp(1.0, -(vlc.level_lengths(depth)[b] + extra));
  }
  return ProbabilityMeasure::normalized(std::move(w));
}

Diagnostics validate_admissible(const VlcSequence& vlc) {
  Diagnostics out;
  const PartitionTree& tree = vlc.tree();
  const std::size_t n = tree.num_points();
  if (vlc.level_lengths(0).size() != 1 || vlc.level_lengths(0)[0] != 0)
    out.push_back({"level0", "level 0 must be a single empty codeword"});

  for (std::size_t k = 1; k <= tree.depth(); ++k) {
    const double kraft = kraft_sum(vlc.level_lengths(k));
    if (kraft > 1.0 + kKraftTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "level " << k << " Kraft sum " << kraft << " > 1";
      out.push_back({"kraft", os.str()});
    }
    const double kraft_ideal = kraft_sum(vlc.level_ideal(k));
    if (kraft_ideal > 1.0 + kKraftTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "level " << k << " ideal-length Kraft sum " << kraft_ideal << " > 1";
      out.push_back({"kraft", os.str()});
    }
    for (int l : vlc.level_lengths(k))
      if (l < 1) {
        out.push_back({"min_length", "level " + std::to_string(k) + " has a length below 1"});
        break;
      }
  }

  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 1; k <= tree.depth(); ++k) {
      if (vlc.length(k, t) < vlc.length(k - 1, t) ||
          vlc.ideal_length(k, t) < vlc.ideal_length(k - 1, t) - kKraftTolerance) {
        out.push_back({"monotone", "length of point " + std::to_string(t) + " decreases at level " +
                                       std::to_string(k)});
        break;
      }
    }
    for (std::size_t k = 0; k <= tree.depth(); ++k) {
      const std::size_t pk = vlc.projection(k, t);
      if (tree.cell_index(k, pk) != tree.cell_index(k, t)) {
        out.push_back({"idempotent", "pi_" + std::to_string(k) + " is not idempotent at point " +
                                         std::to_string(t)});
        break;
      }
      if (k + 1 <= tree.depth() && vlc.projection(k, vlc.projection(k + 1, t)) != pk) {
        out.push_back({"refinement", "pi_" + std::to_string(k) + " != pi_" + std::to_string(k) +
                                         " o pi_" + std::to_string(k + 1) + " at point " +
                                         std::to_string(t)});
        break;
      }
    }
  }
  if (!tree.terminal())
    out.push_back({"resolution", "last stored level still has cells of positive diameter; "
                                 "resolutions do not reach 0"});
  return out;
}

Diagnostics validate_admissible(const VlcSequence& vlc, const MetricSpace& space) {
  Diagnostics out = validate_admissible(vlc);
  const PartitionTree& tree = vlc.tree();
  if (space.size() != tree.num_points()) {
    out.push_back({"size", "space and code sequence disagree on the point count"});
    return out;
  }
  for (std::size_t k = 0; k <= tree.depth(); ++k) {
    const double rho = k == 0 ? diameter(space) : vlc.resolution(k);
    for (std::size_t t = 0; t < space.size(); ++t) {
      if (space(t, vlc.projection(k, t)) > rho + 1e-12) {
        out.push_back({"resolution", "pi_" + std::to_string(k) + " moves point " + space.label(t) +
                                         " farther than rho_k"});
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> canonical_codewords(std::span<const int> lengths) {
  if (kraft_sum(lengths) > 1.0 + kKraftTolerance)
    throw ParameterError("lengths violate the Kraft inequality; no prefix code exists");
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::vector<std::string> out(lengths.size());
  std::uint64_t code = 0;
  int prev = 0;
  for (std::size_t i : order) {
    const int l = lengths[i];
    if (l > 63) throw ParameterError("codeword longer than 63 bits");
    code <<= (l - prev);
    std::string word(static_cast<std::size_t>(l), '0');
    for (int b = 0; b < l; ++b)
      if (code & (std::uint64_t{1} << (l - 1 - b))) word[static_cast<std::size_t>(b)] = '1';
    out[i] = std::move(word);
    ++code;
    prev = l;
  }
  return out;
}

}  // namespace chaining
