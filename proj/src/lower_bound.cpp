#include "chaining/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace chaining {

namespace {

constexpr double kDiameterTolerance = 1e-12;

PointSet intersect_ball(const MetricSpace& metric, std::size_t center, double radius,
                        const PointSet& within) {
  PointSet out;
  for (std::size_t p : within)
    if (metric(center, p) <= radius) out.push_back(p);
  return out;
}

}  // namespace

GreedyPartition greedy_gaussian_partition(const GaussianModel& model, const MetricSpace& metric,
                                          double r, std::size_t max_depth, const McConfig& mc) {
  if (!(r >= 2.0)) throw ParameterError("partition ratio r must be >= 2");
  if (max_depth < 1) throw ParameterError("max_depth must be >= 1");
  if (metric.size() != model.size()) throw StructuralError("metric and model sizes differ");
  const double diam = diameter(metric);
  if (diam > 1.0 + kDiameterTolerance)
    throw ParameterError("metric must be normalized to diameter <= 1 before partitioning");

  const Eigen::MatrixXd draws = sample(model, mc.n, mc.seed);
  const auto& order = metric.label_order();
  std::vector<std::size_t> rank(metric.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  auto by_label = [&](PointSet s) {
    std::sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    return s;
  };

  GreedyPartition result{PartitionTree(r, 1, {{Cell{{0}, 0, kNoParent, 1}}}, true), {}};
  PointSet all(metric.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::vector<Cell>> levels{{Cell{all, order.front(), kNoParent, 1}}};

  bool terminal = false;
  for (std::size_t k = 1; k <= max_depth && !terminal; ++k) {
    const double select_radius = std::pow(r, -static_cast<double>(k + 1)) / 2.0;
    const double carve_radius = std::pow(r, -static_cast<double>(k)) / 2.0;
    std::vector<Cell> next;
    const auto& prev = levels.back();
    for (std::size_t b = 0; b < prev.size(); ++b) {
      PointSet remaining = prev[b].members;
      std::size_t i = 0;
      while (!remaining.empty()) {
        ++i;
        std::size_t best = remaining.front();
        McEstimate best_g;
        PointSet best_set;
        McEstimate runner_g;
        bool have_best = false;
        bool have_runner = false;
        for (std::size_t t : by_label(remaining)) {
          PointSet local = intersect_ball(metric, t, select_radius, remaining);
          const McEstimate g = estimate_sup(draws, local, mc.seed);
          if (!have_best || g.value > best_g.value) {
            if (have_best && local != best_set) {
              runner_g = best_g;
              have_runner = true;
            }
            best = t;
            best_g = g;
            best_set = std::move(local);
            have_best = true;
          } else if (local != best_set && (!have_runner || g.value > runner_g.value)) {
            runner_g = g;
            have_runner = true;
          }
        }
        if (have_runner &&
            runner_g.value + runner_g.half_width >= best_g.value - best_g.half_width) {
          std::ostringstream os;
          os << "level " << k << " parent " << b << " child " << i
             << ": top two candidate G estimates overlap; chose " << metric.label(best);
          result.warnings.push_back(os.str());
        }
        Cell cell;
        cell.members = intersect_ball(metric, best, carve_radius, remaining);
        cell.representative = best;
        cell.parent = b;
        cell.child_index = i;
        std::erase_if(remaining, [&](std::size_t p) {
          return std::binary_search(cell.members.begin(), cell.members.end(), p);
        });
        next.push_back(std::move(cell));
      }
    }
    terminal = std::all_of(next.begin(), next.end(),
                           [&](const Cell& c) { return diameter(metric, c.members) == 0.0; });
    levels.push_back(std::move(next));
  }
  result.tree = PartitionTree(r, metric.size(), std::move(levels), terminal, diam);
  return result;
}

VlcSequence assign_lower_codes(std::shared_ptr<const PartitionTree> tree) {
  std::vector<std::vector<int>> lengths{{0}};
  std::vector<std::vector<double>> ideal{{0.0}};
  for (std::size_t k = 1; k <= tree->depth(); ++k) {
    const auto& cells = tree->levels()[k];
    std::vector<int> level_int;
    std::vector<double> level_ideal;
    for (const Cell& c : cells) {
      if (c.child_index == 0) throw StructuralError("tree is missing child indices");
      if (c.parent >= ideal[k - 1].size()) throw StructuralError("cell with an invalid parent");
      const double value =
          ideal[k - 1][c.parent] + 2.0 * std::log2(static_cast<double>(c.child_index) + 1.0);
      level_ideal.push_back(value);
      level_int.push_back(snapped_ceil(value));
    }
    lengths.push_back(std::move(level_int));
    ideal.push_back(std::move(level_ideal));
  }
  // Deeper levels are single-child chains: index 1, increment 2 log2(2) = 2.
  return VlcSequence(std::move(tree), std::move(lengths), std::move(ideal), 2, "lower");
}

LenDiffReport verify_len_diff(const GaussianModel& model, const VlcSequence& vlc, double r,
                              const McConfig& mc) {
  const PartitionTree& tree = vlc.tree();
  if (tree.num_points() != model.size()) throw StructuralError("model and code sequence sizes differ");
  if (std::abs(r - tree.ratio()) > 1e-12) throw ParameterError("r does not match the tree's ratio");
  LenDiffReport report;
  PointSet all(model.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  report.g_hat = estimate_sup(model, all, mc.n, mc.seed);
  report.c0 = tree.root_diameter();
  const double denom = report.g_hat.value + report.c0;
  if (!(denom > 0.0)) throw DegenerateSpaceError("G(T) + diam(T) vanishes; ratio undefined");

  const std::size_t depth = tree.depth();
  const double tail = std::sqrt(static_cast<double>(vlc.tail_increment())) *
                      std::pow(r, -static_cast<double>(depth)) / (r - 1.0);
  for (std::size_t t = 0; t < model.size(); ++t) {
    double s = 0.0;
    for (std::size_t k = 1; k <= depth; ++k) {
      const double step = vlc.ideal_length(k, t) - vlc.ideal_length(k - 1, t);
      s += std::pow(r, -static_cast<double>(k)) * std::sqrt(std::max(0.0, step));
    }
    s += tail;
    report.increments_sum.push_back(s);
    report.ratios.push_back(s / denom);
  }
  report.sup_increments = *std::max_element(report.increments_sum.begin(), report.increments_sum.end());
  report.sup_ratio = *std::max_element(report.ratios.begin(), report.ratios.end());
  return report;
}

SudakovReport sudakov_check(const GaussianModel& model, const PointSet& points,
                            std::optional<double> a, const std::vector<PointSet>& parts,
                            const McConfig& mc) {
  const std::size_t m = points.size();
  if (m < 2) throw ParameterError("Sudakov check needs at least two points");
  for (std::size_t t : points)
    if (t >= model.size()) throw LookupError("point outside the model");
  const MetricSpace metric = canonical_metric(model);
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) min_gap = std::min(min_gap, metric(points[i], points[j]));
  const double sep = a.value_or(min_gap);
  if (!(sep > 0.0) || min_gap < sep - 1e-12)
    throw ParameterError("points are not a-separated for a positive a under the canonical metric");

  std::vector<PointSet> h = parts;
  if (h.empty())
    for (std::size_t t : points) h.push_back({t});
  if (h.size() != m) throw StructuralError("need one set H_l per separated point");

  SudakovReport report;
  report.m = m;
  report.a = sep;
  PointSet joined;
  for (std::size_t l = 0; l < m; ++l) {
    if (h[l].empty()) throw ParameterError("empty set H_l");
    for (std::size_t s : h[l]) {
      if (s >= model.size()) throw LookupError("H_l point outside the model");
      report.b = std::max(report.b, metric(points[l], s));
      joined.push_back(s);
    }
  }
  std::sort(joined.begin(), joined.end());
  joined.erase(std::unique(joined.begin(), joined.end()), joined.end());

  const Eigen::MatrixXd draws = sample(model, mc.n, mc.seed);
  report.g_union = estimate_sup(draws, joined, mc.seed);
  report.min_g_part = std::numeric_limits<double>::infinity();
  for (auto& part : h) {
    std::sort(part.begin(), part.end());
    report.g_parts.push_back(estimate_sup(draws, part, mc.seed));
    report.min_g_part = std::min(report.min_g_part, report.g_parts.back().value);
  }
  report.separation_term = sep * std::sqrt(std::log2(static_cast<double>(m)));
  report.fitted_constant = (report.g_union.value - report.min_g_part) / report.separation_term;
  return report;
}

}  // namespace chaining
