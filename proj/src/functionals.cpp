#include "chaining/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chaining/parallel.hpp"

namespace chaining {

namespace {

constexpr std::size_t kMaxSeriesTerms = 100000;

double pow_neg(double r, std::size_t k) { return std::pow(r, -static_cast<double>(k)); }

// -ln p_k, rejecting zero weights (the series would diverge).
double neg_log_weight(const WeightSequence& p, std::size_t k) {
  const double pk = p(k);
  if (!(pk > 0.0))
    throw DivergenceError("p_" + std::to_string(k) + " = 0 makes the chaining series diverge");
  return -std::log(pk);
}

// Explicit part k = 1..last plus the analytic tail from last + 1 where the
// radicand is a + b k.
SeriesValue explicit_plus_tail(const PartitionTree& tree, std::size_t last,
                               const std::function<double(std::size_t)>& radicand, double a,
                               double b, double tol) {
  SeriesValue out;
  for (std::size_t k = 1; k <= last; ++k)
    out.value += tree.resolution(k - 1) * std::sqrt(std::max(0.0, radicand(k)));
  const SeriesValue tail = sqrt_linear_geometric_series(1.0 / tree.ratio(), a, b, last + 1, tol);
  out.value += tail.value;
  out.tail_bound = tail.tail_bound;
  return out;
}

}  // namespace

SeriesValue sqrt_linear_geometric_series(double x, double a, double b, std::size_t k0,
                                         double tol) {
  if (!(x > 0.0 && x < 1.0)) throw ParameterError("series ratio must lie in (0, 1)");
  if (b < 0.0) throw ParameterError("series slope must be >= 0");
  const double geo = 1.0 / (1.0 - x);
  if (b == 0.0) {
    // Constant radicand: closed form, no remainder.
    return {std::pow(x, static_cast<double>(k0) - 1.0) * std::sqrt(std::max(0.0, a)) * geo, 0.0};
  }
  // sqrt(a + b j) <= sqrt(a + b k) + sqrt(b) (j - k) for integers j >= k.
  const double sb = std::sqrt(b);
  SeriesValue out;
  double xk = std::pow(x, static_cast<double>(k0) - 1.0);
  for (std::size_t k = k0; k < k0 + kMaxSeriesTerms; ++k) {
    const double f = std::sqrt(std::max(0.0, a + b * static_cast<double>(k)));
    const double remainder = xk * (f * geo + sb * x * geo * geo);
    if (remainder < tol) {
      out.value += remainder;
      out.tail_bound = remainder;
      return out;
    }
    out.value += xk * f;
    xk *= x;
  }
  throw DivergenceError("series did not reach the tail tolerance");
}

double ft_functional(const MetricSpace& space, const ProbabilityMeasure& mu, std::size_t t) {
  if (mu.size() != space.size()) throw StructuralError("measure and space sizes differ");
  if (t >= space.size()) throw LookupError("point outside the space");
  const std::size_t n = space.size();
  std::vector<std::pair<double, double>> by_distance;  // (d(t,s), mu(s))
  by_distance.reserve(n);
  for (std::size_t s = 0; s < n; ++s) by_distance.emplace_back(space(t, s), mu[s]);
  std::sort(by_distance.begin(), by_distance.end());

  const double upper = diameter(space);
  double mass = 0.0;
  double integral = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double eps = by_distance[i].first;
    while (i < n && by_distance[i].first == eps) mass += by_distance[i++].second;
    if (eps == 0.0 && !(mass > 0.0))
      throw InfiniteLengthError("mu(B(t,0)) = 0: the Fernique-Talagrand integrand diverges at t");
    const double next = i < n ? std::min(by_distance[i].first, upper) : upper;
    if (next <= eps) continue;
    const double bits = mass >= 1.0 ? 0.0 : -std::log2(mass);
    integral += (next - eps) * std::sqrt(std::max(0.0, bits));
  }
  return integral;
}

double m_functional(const MetricSpace& space, const ProbabilityMeasure& mu,
                    const ProbabilityMeasure& nu) {
  if (nu.size() != space.size()) throw StructuralError("measure and space sizes differ");
  double total = 0.0;
  for (std::size_t t = 0; t < space.size(); ++t)
    if (nu[t] > 0.0) total += nu[t] * ft_functional(space, mu, t);
  return total;
}

SeriesValue sigma_bar(const VlcSequence& vlc, const WeightSequence& p, std::size_t t, double tol) {
  const PartitionTree& tree = vlc.tree();
  const std::size_t depth = tree.depth();
  const std::size_t last = std::max(depth, p.prefix_size());
  constexpr double ln2 = std::numbers::ln2;
  auto radicand = [&](std::size_t k) {
    return (vlc.length(k, t) + 1.0) * ln2 + neg_log_weight(p, k);
  };
  if (!p.has_tail())
    throw DivergenceError("finitely supported level weights make the chaining series diverge");
  const double g = vlc.tail_increment();
  const double base = vlc.length(depth, t) - g * static_cast<double>(depth);
  const double a = (base + 1.0) * ln2 + p.log_intercept();
  const double b = g * ln2 + p.log_slope();
  return explicit_plus_tail(tree, last, radicand, a, b, tol);
}

SeriesValue sigma_code(const VlcSequence& vlc, std::size_t t, LengthChannel channel, double tol) {
  const PartitionTree& tree = vlc.tree();
  const std::size_t depth = tree.depth();
  auto radicand = [&](std::size_t k) { return vlc.length(channel, k, t); };
  const double g = vlc.tail_increment();
  const double a = vlc.length(channel, depth, t) - g * static_cast<double>(depth);
  return explicit_plus_tail(tree, depth, radicand, a, g, tol);
}

SeriesValue sigma_code_ln(const VlcSequence& vlc, std::size_t t, double tol) {
  const PartitionTree& tree = vlc.tree();
  const std::size_t depth = tree.depth();
  constexpr double ln2 = std::numbers::ln2;
  auto radicand = [&](std::size_t k) { return (vlc.length(k, t) + 1.0) * ln2; };
  const double g = vlc.tail_increment();
  const double a = (vlc.length(depth, t) - g * static_cast<double>(depth) + 1.0) * ln2;
  return explicit_plus_tail(tree, depth, radicand, a, g * ln2, tol);
}

SeriesValue sigma_prime(const VlcSequence& vlc, const WeightSequence& p, double tol) {
  const PartitionTree& tree = vlc.tree();
  if (!p.has_tail())
    throw DivergenceError("finitely supported level weights make the chaining series diverge");
  const std::size_t last = std::max<std::size_t>(1, p.prefix_size());
  constexpr double ln2 = std::numbers::ln2;
  auto radicand = [&](std::size_t k) { return ln2 + neg_log_weight(p, k); };
  return explicit_plus_tail(tree, last, radicand, ln2 + p.log_intercept(), p.log_slope(), tol);
}

SeriesValue refinement_bound(const VlcSequence& vlc, std::size_t t, LengthChannel channel) {
  const PartitionTree& tree = vlc.tree();
  const double r = tree.ratio();
  double sum = 0.0;
  for (std::size_t k = 1; k <= tree.depth(); ++k) {
    const double step = vlc.length(channel, k, t) - vlc.length(channel, k - 1, t);
    if (step < -1e-12)
      throw AdmissibilityError("code length decreases at level " + std::to_string(k));
    sum += pow_neg(r, k - 1) * std::sqrt(std::max(0.0, step));
  }
  // Constant increment past the stored depth: closed-form geometric tail.
  sum += std::sqrt(static_cast<double>(vlc.tail_increment())) * pow_neg(r, tree.depth()) /
         (1.0 - 1.0 / r);
  return {2.0 * sum, 0.0};
}

double bednorz_partition_bound(const PartitionTree& tree, const ProbabilityMeasure& mu,
                               std::size_t t) {
  if (mu.size() != tree.num_points()) throw StructuralError("measure and tree sizes differ");
  double sum = 0.0;
  double prev = mu.mass(tree.cell_of(0, t).members);
  for (std::size_t k = 1; k <= tree.depth(); ++k) {
    const double cur = mu.mass(tree.cell_of(k, t).members);
    if (!(cur > 0.0))
      throw InfiniteLengthError("measure vanishes on the level-" + std::to_string(k) +
                                " cell of the point");
    sum += pow_neg(tree.ratio(), k - 1) * std::sqrt(std::max(0.0, std::log2(prev / cur)));
    prev = cur;
  }
  return sum;
}

double cross_entropy(const PartitionTree& tree, std::size_t k, std::size_t parent,
                     const ProbabilityMeasure& mu, const ProbabilityMeasure& nu) {
  if (k == 0 || k > tree.depth()) throw ParameterError("entropy level must lie in 1..depth");
  if (mu.size() != tree.num_points() || nu.size() != tree.num_points())
    throw StructuralError("measure and tree sizes differ");
  const auto& parents = tree.levels()[k - 1];
  if (parent >= parents.size()) throw ParameterError("parent cell out of range");
  const double mu_b = mu.mass(parents[parent].members);
  const double nu_b = nu.mass(parents[parent].members);
  if (!(mu_b > 0.0) || !(nu_b > 0.0))
    throw ParameterError("conditional measure undefined on a zero-mass parent cell");
  double h = 0.0;
  for (std::size_t a : tree.children(k - 1, parent)) {
    const auto& members = tree.levels()[k][a].members;
    const double pa = mu.mass(members) / mu_b;
    if (pa <= 0.0) continue;
    const double qa = nu.mass(members) / nu_b;
    if (!(qa > 0.0)) throw InfiniteLengthError("cross-entropy is infinite: nu vanishes where mu does not");
    h -= pa * std::log2(qa);
  }
  return h;
}

double conditional_entropy(const PartitionTree& tree, std::size_t k, std::size_t parent,
                           const ProbabilityMeasure& mu) {
  return cross_entropy(tree, k, parent, mu, mu);
}

double entropy_chain_bound(const PartitionTree& tree, const ProbabilityMeasure& mu) {
  double sum = 0.0;
  for (std::size_t k = 1; k <= tree.depth(); ++k) {
    double level = 0.0;
    const auto& parents = tree.levels()[k - 1];
    for (std::size_t b = 0; b < parents.size(); ++b) {
      const double h = conditional_entropy(tree, k, b, mu);
      level += mu.mass(parents[b].members) * std::sqrt(std::max(0.0, h));
    }
    sum += pow_neg(tree.ratio(), k - 1) * level;
  }
  return sum;
}

double geometric_scale_sum(double r) { return 1.0 / (1.0 - 1.0 / r); }

void BoundReport::finalize() {
  if (tail_bounds.size() < values.size()) tail_bounds.resize(values.size(), 0.0);
  sup = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  tail_bound = tail_bounds.empty() ? 0.0 : *std::max_element(tail_bounds.begin(), tail_bounds.end());
}

std::size_t BoundReport::argmax() const {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

namespace {

template <typename T>
const T& need(const T* ptr, const char* what, const std::string& functional) {
  if (!ptr) throw ParameterError("functional '" + functional + "' needs " + what);
  return *ptr;
}

}  // namespace

BoundReport evaluate_report(const std::string& functional, const ReportInputs& in) {
  BoundReport report;
  report.functional = functional;

  auto per_point = [&](std::size_t n, const std::vector<std::string>& labels,
                       const std::function<SeriesValue(std::size_t)>& eval) {
    report.points = labels;
    report.values.assign(n, 0.0);
    report.tail_bounds.assign(n, 0.0);
    parallel_for(n, [&](std::size_t t) {
      const SeriesValue v = eval(t);
      report.values[t] = v.value;
      report.tail_bounds[t] = v.tail_bound;
    });
  };
  auto point_labels = [&](std::size_t n) {
    if (in.space && in.space->size() == n) return in.space->labels();
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return labels;
  };
  auto describe_vlc = [&](const VlcSequence& vlc) {
    report.construction = vlc.construction();
    report.r = vlc.tree().ratio();
    report.depth = vlc.depth();
  };

  if (functional == "ft") {
    const auto& space = need(in.space, "a metric space", functional);
    const auto& mu = need(in.mu, "a measure", functional);
    per_point(space.size(), space.labels(),
              [&](std::size_t t) { return SeriesValue{ft_functional(space, mu, t), 0.0}; });
  } else if (functional == "m") {
    const auto& space = need(in.space, "a metric space", functional);
    const auto& mu = need(in.mu, "a measure", functional);
    const ProbabilityMeasure nu = in.nu ? *in.nu : mu;
    report.points = {"M(mu,nu)"};
    report.values = {m_functional(space, mu, nu)};
    report.tail_bounds = {0.0};
  } else if (functional == "sigma-bar") {
    const auto& vlc = need(in.vlc, "a code sequence", functional);
    const auto& p = need(in.p, "level weights", functional);
    describe_vlc(vlc);
    per_point(vlc.tree().num_points(), point_labels(vlc.tree().num_points()),
              [&](std::size_t t) { return sigma_bar(vlc, p, t); });
  } else if (functional == "sigma-code") {
    const auto& vlc = need(in.vlc, "a code sequence", functional);
    describe_vlc(vlc);
    per_point(vlc.tree().num_points(), point_labels(vlc.tree().num_points()),
              [&](std::size_t t) { return sigma_code(vlc, t, in.channel); });
  } else if (functional == "sigma-prime") {
    const auto& vlc = need(in.vlc, "a code sequence", functional);
    const auto& p = need(in.p, "level weights", functional);
    describe_vlc(vlc);
    const SeriesValue v = sigma_prime(vlc, p);
    per_point(vlc.tree().num_points(), point_labels(vlc.tree().num_points()),
              [&](std::size_t) { return v; });
  } else if (functional == "refinement") {
    const auto& vlc = need(in.vlc, "a code sequence", functional);
    describe_vlc(vlc);
    per_point(vlc.tree().num_points(), point_labels(vlc.tree().num_points()),
              [&](std::size_t t) { return refinement_bound(vlc, t, in.channel); });
  } else if (functional == "bednorz") {
    const auto& tree = need(in.tree, "a partition tree", functional);
    const auto& mu = need(in.mu, "a measure", functional);
    report.r = tree.ratio();
    report.depth = tree.depth();
    per_point(tree.num_points(), point_labels(tree.num_points()), [&](std::size_t t) {
      return SeriesValue{bednorz_partition_bound(tree, mu, t), 0.0};
    });
  } else if (functional == "entropy-chain") {
    const auto& tree = need(in.tree, "a partition tree", functional);
    const auto& mu = need(in.mu, "a measure", functional);
    report.r = tree.ratio();
    report.depth = tree.depth();
    report.points = {"sup-entropy"};
    report.values = {entropy_chain_bound(tree, mu)};
    report.tail_bounds = {0.0};
  } else {
    throw ParameterError("unknown functional '" + functional + "'");
  }
  report.finalize();
  return report;
}

}  // namespace chaining
