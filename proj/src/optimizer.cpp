#include "chaining/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "chaining/error.hpp"
#include "chaining/parallel.hpp"
#include "chaining/rng.hpp"

namespace chaining {

namespace {

constexpr double kMassFloor = 1e-12;
constexpr std::size_t kStallWindow = 10;
// Adversary payoffs are rescaled to [-kAdversaryGain, 0] each round.
constexpr double kAdversaryGain = 8.0;

// Distances from each t grouped into distinct radii, for O(n) evaluation of I_mu(t).
class FtEvaluator {
 public:
  explicit FtEvaluator(const MetricSpace& space) : n_(space.size()), upper_(diameter(space)) {
    groups_.resize(n_);
    for (std::size_t t = 0; t < n_; ++t) {
      std::vector<std::pair<double, std::size_t>> order;
      for (std::size_t s = 0; s < n_; ++s) order.emplace_back(space(t, s), s);
      std::sort(order.begin(), order.end());
      for (std::size_t i = 0; i < n_;) {
        Group g{order[i].first, {}};
        while (i < n_ && order[i].first == g.radius) g.members.push_back(order[i++].second);
        groups_[t].push_back(std::move(g));
      }
    }
  }

  std::size_t size() const { return n_; }

  double value(const std::vector<double>& mu, std::size_t t) const {
    double mass = 0.0;
    double integral = 0.0;
    const auto& gs = groups_[t];
    for (std::size_t j = 0; j < gs.size(); ++j) {
      for (std::size_t s : gs[j].members) mass += mu[s];
      const double next = j + 1 < gs.size() ? std::min(gs[j + 1].radius, upper_) : upper_;
      if (next <= gs[j].radius) continue;
      if (!(mass > 0.0)) return std::numeric_limits<double>::infinity();
      const double bits = mass >= 1.0 ? 0.0 : -std::log2(mass);
      integral += (next - gs[j].radius) * std::sqrt(std::max(0.0, bits));
    }
    return integral;
  }

  std::vector<double> values(const std::vector<double>& mu) const {
    std::vector<double> out(n_);
    for (std::size_t t = 0; t < n_; ++t) out[t] = value(mu, t);
    return out;
  }

  double sup(const std::vector<double>& mu) const {
    double best = 0.0;
    for (std::size_t t = 0; t < n_; ++t) best = std::max(best, value(mu, t));
    return best;
  }

  double self_average(const std::vector<double>& mu) const {
    double total = 0.0;
    for (std::size_t t = 0; t < n_; ++t)
      if (mu[t] > 0.0) total += mu[t] * value(mu, t);
    return total;
  }

  void add_gradient(const std::vector<double>& mu, std::size_t t, double weight,
                    std::vector<double>& grad) const {
    const auto& gs = groups_[t];
    std::vector<double> coef(gs.size(), 0.0);
    double mass = 0.0;
    for (std::size_t j = 0; j < gs.size(); ++j) {
      for (std::size_t s : gs[j].members) mass += mu[s];
      const double next = j + 1 < gs.size() ? std::min(gs[j + 1].radius, upper_) : upper_;
      if (next <= gs[j].radius || mass >= 1.0) continue;
      const double bits = -std::log2(mass);
      if (!(bits > 1e-12)) continue;
      coef[j] = -(next - gs[j].radius) / (2.0 * std::sqrt(bits) * mass * std::numbers::ln2);
    }
    double suffix = 0.0;
    for (std::size_t j = gs.size(); j-- > 0;) {
      suffix += coef[j];
      for (std::size_t s : gs[j].members) grad[s] += weight * suffix;
    }
  }

 private:
  struct Group {
    double radius;
    std::vector<std::size_t> members;
  };
  std::size_t n_;
  double upper_;
  std::vector<std::vector<Group>> groups_;
};

void renormalize(std::vector<double>& w) {
  for (double& x : w) x = std::max(x, kMassFloor);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
}

std::vector<double> start_point(std::size_t n, std::uint64_t seed, std::size_t restart) {
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (restart == 0) return w;
  Engine eng = make_engine(seed, restart);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> z(n);
  for (double& x : z) x = expo(eng);
  const double total = std::accumulate(z.begin(), z.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 * w[i] + 0.5 * z[i] / total;
  renormalize(w);
  return w;
}

bool stalled(const std::vector<double>& trace, double tol) {
  if (trace.size() <= kStallWindow) return false;
  return trace[trace.size() - 1 - kStallWindow] - trace.back() < tol;
}

struct RestartOutcome {
  std::vector<double> mu;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
};

RestartOutcome run_minimax(const FtEvaluator& ev, const OptimizerConfig& cfg, std::size_t restart) {
  const std::size_t n = ev.size();
  std::vector<double> mu = start_point(n, cfg.seed, restart);
  std::vector<double> q(n, 1.0 / static_cast<double>(n));
  RestartOutcome out;
  for (std::size_t iter = 1; iter <= cfg.iters; ++iter) {
    const std::vector<double> vals = ev.values(mu);
    const double top = *std::max_element(vals.begin(), vals.end());
    if (top < out.value) {
      out.value = top;
      out.mu = mu;
    }
    out.trace.push_back(out.value);
    if (stalled(out.trace, cfg.tol) || !(top > 0.0)) break;

    const double eta = cfg.step / std::sqrt(static_cast<double>(iter));
    const double low = *std::min_element(vals.begin(), vals.end());
    const double spread = top - low > 1e-12 ? top - low : 1.0;
    for (std::size_t t = 0; t < n; ++t) q[t] *= std::exp(eta * (vals[t] - top) / spread * kAdversaryGain);
    const double qs = std::accumulate(q.begin(), q.end(), 0.0);
    for (double& x : q) x /= qs;

    std::vector<double> grad(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) ev.add_gradient(mu, t, q[t], grad);
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    if (!(scale > 0.0)) break;
    // Halve the step while the sup gets worse; keep the least bad try otherwise.
    std::vector<double> chosen;
    double chosen_value = std::numeric_limits<double>::infinity();
    for (double h = eta; h > eta / 256.0; h /= 2.0) {
      std::vector<double> cand = mu;
      for (std::size_t s = 0; s < n; ++s) cand[s] *= std::exp(-h * grad[s] / scale);
      renormalize(cand);
      const double v = ev.sup(cand);
      if (v < chosen_value) {
        chosen_value = v;
        chosen = std::move(cand);
      }
      if (v <= top) break;
    }
    mu = std::move(chosen);
  }
  return out;
}

}  // namespace

std::vector<double> ft_gradient(const MetricSpace& space, const ProbabilityMeasure& mu,
                                const std::vector<double>& q) {
  if (mu.size() != space.size() || q.size() != space.size())
    throw StructuralError("measure, weights and space sizes differ");
  FtEvaluator ev(space);
  std::vector<double> grad(space.size(), 0.0);
  for (std::size_t t = 0; t < space.size(); ++t)
    if (q[t] != 0.0) ev.add_gradient(mu.weights(), t, q[t], grad);
  return grad;
}

MajorizingResult optimize_majorizing_measure(const MetricSpace& space, const OptimizerConfig& cfg) {
  const std::size_t n = space.size();
  const ProbabilityMeasure uniform = ProbabilityMeasure::uniform(n);
  if (n == 1) return {ProbabilityMeasure::dirac(1, 0), 0.0, 0.0, {0.0}, 0};

  const FtEvaluator ev(space);
  const double baseline = ev.sup(uniform.weights());
  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  std::vector<RestartOutcome> outcomes(restarts);
  parallel_for(restarts, [&](std::size_t r) { outcomes[r] = run_minimax(ev, cfg, r); });

  MajorizingResult result{uniform, baseline, baseline, {baseline}, 0};
  std::size_t rounds = 0;
  for (const auto& o : outcomes) rounds = std::max(rounds, o.trace.size());
  for (std::size_t i = 0; i < rounds; ++i) {
    double best = result.trace.back();
    for (const auto& o : outcomes)
      if (!o.trace.empty()) best = std::min(best, o.trace[std::min(i, o.trace.size() - 1)]);
    result.trace.push_back(best);
  }
  result.iterations = rounds;
  for (const auto& o : outcomes) {
    if (o.mu.empty()) continue;
    // Re-evaluate on the stored measure so the reported value matches it exactly.
    ProbabilityMeasure candidate = ProbabilityMeasure::normalized(o.mu);
    const double v = ev.sup(candidate.weights());
    if (v < result.value) {
      result.value = v;
      result.measure = std::move(candidate);
    }
  }
  result.trace.back() = std::min(result.trace.back(), result.value);
  for (std::size_t i = result.trace.size() - 1; i-- > 0;)
    result.trace[i] = std::max(result.trace[i], result.trace[i + 1]);
  return result;
}

SelfBoundResult fernique_self_bound(const MetricSpace& space, const OptimizerConfig& cfg) {
  const std::size_t n = space.size();
  if (n == 1) return {ProbabilityMeasure::dirac(1, 0), 0.0, 0.0, 0.0, true, 0};

  const FtEvaluator ev(space);
  const std::vector<double> uni(n, 1.0 / static_cast<double>(n));
  const double baseline = ev.self_average(uni);
  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);

  struct Climb {
    std::vector<double> mu;
    double value = 0.0;
    std::size_t rounds = 0;
  };
  std::vector<Climb> climbs(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    std::vector<double> mu = start_point(n, cfg.seed, r);
    double value = ev.self_average(mu);
    Engine eng = make_engine(cfg.seed, 1000 + r);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double step = 0.5;
    std::vector<double> trace{value};
    std::size_t round = 0;
    for (; round < cfg.iters && step > cfg.tol; ++round) {
      bool moved = false;
      for (std::size_t trial = 0; trial < n; ++trial) {
        const std::size_t i = pick(eng);
        const std::size_t j = pick(eng);
        if (i == j) continue;
        std::vector<double> cand = mu;
        const double delta = step * cand[i];
        cand[i] -= delta;
        cand[j] += delta;
        const double v = ev.self_average(cand);
        if (v > value) {
          mu = std::move(cand);
          value = v;
          moved = true;
        }
      }
      const std::vector<double> vals = ev.values(mu);
      const double top = *std::max_element(vals.begin(), vals.end());
      std::vector<double> heavy(n, 0.0);
      double count = 0.0;
      for (std::size_t t = 0; t < n; ++t)
        if (vals[t] >= top - 1e-12) heavy[t] = 1.0, count += 1.0;
      std::vector<double> cand(n);
      for (std::size_t t = 0; t < n; ++t) cand[t] = 0.5 * mu[t] + 0.5 * heavy[t] / count;
      const double v = ev.self_average(cand);
      if (v > value) {
        mu = std::move(cand);
        value = v;
        moved = true;
      }
      if (!moved) step /= 2.0;
      trace.push_back(value);
      if (trace.size() > kStallWindow && moved &&
          value - trace[trace.size() - 1 - kStallWindow] < cfg.tol)
        break;
    }
    climbs[r] = {std::move(mu), value, round};
  });

  SelfBoundResult result{ProbabilityMeasure::uniform(n), baseline, 0.0, baseline, true, 0};
  for (const auto& c : climbs) {
    result.iterations = std::max(result.iterations, c.rounds);
    ProbabilityMeasure candidate = ProbabilityMeasure::normalized(c.mu);
    const double v = ev.self_average(candidate.weights());
    if (v > result.value) {
      result.value = v;
      result.measure = std::move(candidate);
    }
  }
  result.sup_ft = ev.sup(result.measure.weights());
  result.consistent = result.value <= result.sup_ft + 1e-12;
  return result;
}

}  // namespace chaining
