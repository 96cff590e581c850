// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chaining/functionals.hpp"
#include "chaining/gaussian.hpp"
#include "chaining/lower_bound.hpp"
#include "chaining/optimizer.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/vlc.hpp"
#include "fixtures.hpp"
#include "quadrature.hpp"

using namespace chaining;

namespace {

// Frozen from `acceptance --calibrate`: max sup-ratio over the iid family {2, 4, 8, 16}.
constexpr double kLowerBoundConstant = 1.1428996176943607;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Instance {
  std::string name;
  MetricSpace space;
  ProbabilityMeasure mu;
  double r;
  std::shared_ptr<const PartitionTree> tree;
};

struct Codes {
  std::string name;
  VlcSequence vlc;
  ProbabilityMeasure mixture;  // the single measure the comparison codes are built from
};

std::vector<Instance> standard_suite() {
  std::vector<Instance> out;
  for (std::uint64_t i = 0; i < 54; ++i) {
    const std::size_t n = 2 + (i * 17) % 49;
    const double r = 2.0 + static_cast<double>(i % 3);
    auto space = fixtures::random_space(n, 1 + i % 3, 1000 + i);
    auto mu = i % 4 == 1 ? ProbabilityMeasure::uniform(n) : fixtures::random_measure(n, 2000 + i);
    auto tree = fixtures::share(build_radial_partitions(space, r, 60));
    out.push_back({"suite-" + std::to_string(i) + " (n=" + std::to_string(n) + ", r=" + std::to_string(int(r)) + ")",
                   std::move(space), std::move(mu), r, std::move(tree)});
  }
  return out;
}

std::vector<Codes> all_constructions(const Instance& in) {
  const auto p = WeightSequence::dyadic();
  std::vector<Codes> out;
  const auto cond = conditionals_from_measure(*in.tree, in.mu);
  const auto measures = build_from_measures(in.tree, in.mu, cond);
  out.push_back({"measures", measures, mixture_of_chain(chain_measures(*in.tree, in.mu, cond), p)});
  const auto uni = uniform_conditionals(*in.tree);
  const auto measures_u = build_from_measures(in.tree, in.mu, uni);
  out.push_back({"measures/uniform", measures_u, mixture_of_chain(chain_measures(*in.tree, in.mu, uni), p)});
  const auto net = build_from_labeled_net(in.tree);
  out.push_back({"labeled-net", net, mixture_from_codes(net, p)});
  const auto single = build_from_single_measure(in.tree, in.mu);
  out.push_back({"single-measure", single, mixture_from_codes(single, p)});
  const auto lower = assign_lower_codes(in.tree);
  out.push_back({"lower", lower, mixture_from_codes(lower, p)});
  return out;
}

// Random covariance models with at most 20 points.
std::vector<GaussianModel> random_models() {
  std::vector<GaussianModel> out;
  for (std::uint64_t i = 0; i < 10; ++i) {
    Engine eng = make_engine(3000 + i, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t m = 3 + (i * 7) % 18;
    if (i % 2 == 0) {
      std::vector<std::vector<double>> pts(m, std::vector<double>(2));
      for (auto& q : pts)
        for (double& x : q) x = unit(eng);
      out.push_back(GaussianModel::rbf(pts, 0.2 + 0.6 * unit(eng)));
    } else {
      // A A^T with fewer columns than rows: rank deficient
      std::normal_distribution<double> g;
      const auto cols = static_cast<Eigen::Index>(std::max<std::size_t>(2, m / 2));
      Eigen::MatrixXd a(static_cast<Eigen::Index>(m), cols);
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = g(eng);
      std::vector<std::string> labels;
      for (std::size_t k = 0; k < m; ++k) labels.push_back("x" + std::to_string(k));
      Eigen::MatrixXd cov = a * a.transpose() / static_cast<double>(cols);
      cov = 0.5 * (cov + cov.transpose()).eval();
      out.push_back(GaussianModel(labels, cov));
    }
  }
  return out;
}

struct LowerCase {
  std::string name;
  GaussianModel model;
};

std::vector<LowerCase> lower_suite(bool iid_only) {
  std::vector<LowerCase> out;
  for (std::size_t m : {2, 4, 8, 16}) out.push_back({"iid-" + std::to_string(m), GaussianModel::iid(m)});
  if (iid_only) return out;
  for (std::uint64_t i = 0; i < 10; ++i) {
    Engine eng = make_engine(4000 + i, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t m = 4 + (i * 5) % 17;
    std::vector<std::vector<double>> pts(m, std::vector<double>(2));
    for (auto& q : pts)
      for (double& x : q) x = unit(eng);
    out.push_back({"rbf-" + std::to_string(i), GaussianModel::rbf(pts, 0.2 + 0.6 * unit(eng))});
  }
  return out;
}

double sup_ratio(const GaussianModel& model, const McConfig& mc) {
  const auto inst = normalize_instance(model, 1.0);
  const auto g = greedy_gaussian_partition(inst.model, inst.metric, 2.0, 40, mc);
  const auto v = assign_lower_codes(fixtures::share(g.tree));
  return verify_len_diff(inst.model, v, 2.0, mc).sup_ratio;
}

class Reporter {
 public:
  explicit Reporter(std::set<int> expected) : expected_(std::move(expected)) {}

  void result(int id, const std::string& title, bool pass, const std::string& detail) {
    std::printf("[%s] %2d %s: %s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(),
                !pass && expected_.count(id) ? " (expected)" : "");
    std::fflush(stdout);
    if (!pass && !expected_.count(id)) ++unexpected_;
    if (pass && expected_.count(id)) {
      std::printf("       note: criterion %d was listed as an expected failure but passed\n", id);
      ++unexpected_;
    }
  }
  void info(const std::string& text) {
    std::printf("       %s\n", text.c_str());
    std::fflush(stdout);
  }
  int unexpected() const { return unexpected_; }

 private:
  std::set<int> expected_;
  int unexpected_ = 0;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> expect_fail;
  bool calibrate = false;
  std::vector<int> only;
  app.add_option("--expect-fail", expect_fail, "criteria that are known not to hold");
  app.add_option("--only", only, "run just these criteria");
  app.add_flag("--calibrate", calibrate, "print the iid sup-ratios for the lower-bound constant");
  CLI11_PARSE(app, argc, argv);

  const McConfig lower_mc{20000, 12};
  if (calibrate) {
    double c = 0.0;
    for (const auto& lc : lower_suite(true)) {
      const double s = sup_ratio(lc.model, lower_mc);
      std::printf("%s %.17g\n", lc.name.c_str(), s);
      c = std::max(c, s);
    }
    std::printf("C %.17g\n", c);
    return 0;
  }

  Reporter rep(std::set<int>(expect_fail.begin(), expect_fail.end()));
  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  const auto p = WeightSequence::dyadic();

  auto t_suite = Clock::now();
  const auto suite = standard_suite();
  std::vector<std::vector<Codes>> codes;
  for (const auto& in : suite) codes.push_back(all_constructions(in));
  const double build_time = seconds_since(t_suite);

  if (wanted(1)) {
    const auto t0 = Clock::now();
    std::size_t checked = 0;
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < suite.size(); ++i)
      for (const auto& c : codes[i])
        for (std::size_t k = 1; k <= c.vlc.depth(); ++k) {
          const double s = kraft_sum(c.vlc.level_lengths(k));
          ++checked;
          if (s > worst) {
            worst = s;
            where = suite[i].name + " " + c.name + " level " + std::to_string(k);
          }
        }
    const double elapsed = build_time + seconds_since(t0);
    rep.result(1, "Kraft suite", worst <= 1.0 + 1e-12 && elapsed < 10.0,
               std::to_string(suite.size()) + " instances, " + std::to_string(checked) +
                   " levels, max Kraft sum " + fmt("%.15g", worst) + " at " + where + ", " +
                   fmt("%.2f s", elapsed));
  }

  if (wanted(2)) {
    const auto t0 = Clock::now();
    std::size_t bad = 0, total = 0;
    std::string first;
    for (std::size_t i = 0; i < suite.size(); ++i)
      for (const auto& c : codes[i]) {
        ++total;
        const auto d = validate_admissible(c.vlc, suite[i].space);
        if (!d.empty()) {
          if (!bad) first = suite[i].name + " " + c.name + ": " + d.front().kind + " " + d.front().message;
          ++bad;
        }
      }
    const double elapsed = build_time + seconds_since(t0);
    rep.result(2, "Admissibility suite", bad == 0 && elapsed < 10.0,
               std::to_string(total) + " sequences, " + std::to_string(bad) + " with diagnostics" +
                   (bad ? " (first: " + first + ")" : "") + ", " + fmt("%.2f s", elapsed));
  }

  if (wanted(3)) {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const std::size_t n = 2 + (i * 13) % 49;
      const auto s = fixtures::random_space(n, 1 + i % 3, 5000 + i, i % 2 == 0);
      const auto mu = fixtures::random_measure(n, 6000 + i);
      const std::size_t t = (i * 7) % n;
      worst = std::max(worst, std::abs(ft_functional(s, mu, t) - quadrature::ft_integral(s, mu, t)));
    }
    const double line = ft_functional(fixtures::line3(), ProbabilityMeasure::uniform(3), 0);
    const double oracle = 0.5 * std::sqrt(std::log2(3.0)) + 0.5 * std::sqrt(std::log2(1.5));
    rep.result(3, "Exact functional oracle", worst <= 1e-6 && std::abs(line - oracle) <= 1e-6,
               "max |step sum - quadrature| " + fmt("%.3g", worst) + " over 100 triples; 3-point value " +
                   fmt("%.10f", line) + " vs oracle " + fmt("%.10f", oracle));
    rep.info("3-point value differs from the rounded 1.011917 by " + fmt("%.2g", std::abs(line - 1.011917)));
  }

  if (wanted(4)) {
    double worst = -1e300;
    std::size_t checks = 0;
    for (std::size_t i = 0; i < suite.size(); ++i)
      for (const auto& c : codes[i])
        for (std::size_t t = 0; t < suite[i].space.size(); ++t)
          for (auto ch : {LengthChannel::integer, LengthChannel::ideal}) {
            worst = std::max(worst, sigma_code(c.vlc, t, ch).value - refinement_bound(c.vlc, t, ch).value);
            ++checks;
          }
    rep.result(4, "Refinement inequality", worst <= 1e-12,
               std::to_string(checks) + " (sequence, point, channel) checks, max sigma_C - bound " +
                   fmt("%.3g", worst));
  }

  if (wanted(5)) {
    std::size_t bad = 0, checks = 0, corrected_bad = 0;
    double worst = -1e300;
    std::string where;
    for (const auto& in : suite) {
      const auto single = build_from_single_measure(in.tree, in.mu);
      const double extra = in.r / (in.r - 1.0);  // sum_{k>0} r^{-k+1}
      for (std::size_t t = 0; t < in.space.size(); ++t) {
        ++checks;
        const double lhs = sigma_code(single, t, LengthChannel::ideal).value;
        const double b = bednorz_partition_bound(*in.tree, in.mu, t);
        const double gap = lhs - (b + extra);
        if (gap > 1e-12) ++bad;
        if (gap > worst) {
          worst = gap;
          where = in.name + " point " + in.space.label(t) + " (l_1 = " + fmt("%.3f", single.ideal_length(1, t)) + ")";
        }
        if (lhs > extra * b + 1e-12) ++corrected_bad;
      }
    }
    rep.result(5, "Single-measure certificate", bad == 0,
               std::to_string(bad) + " of " + std::to_string(checks) +
                   " points exceed bednorz + r/(r-1); worst excess " + fmt("%.4g", worst) + " at " + where);
    rep.info("multiplicative form sigma_C(ideal) <= r/(r-1) * bednorz: " + std::to_string(corrected_bad) +
             " violations");
  }

  if (wanted(6)) {
    double worst = -1e300;
    std::size_t checks = 0;
    for (std::size_t i = 0; i < suite.size(); ++i)
      for (const auto& c : codes[i]) {
        const auto prime = build_from_single_measure(suite[i].tree, c.mixture);
        for (std::size_t k = 1; k <= c.vlc.depth() + 3; ++k)
          for (std::size_t t = 0; t < suite[i].space.size(); ++t) {
            const double rhs = c.vlc.length(k, t) + std::log2(2.0 / p(k)) + 1.0;
            worst = std::max(worst, prime.length(k, t) - rhs);
            ++checks;
          }
      }
    rep.result(6, "Single-measure comparison", worst <= 1e-12,
               std::to_string(checks) + " (level, point) checks, max l'_k - (l_k + log2(2/p_k) + 1) " +
                   fmt("%.4g", worst));
  }

  if (wanted(7)) {
    // any r = 2 sequence over a unit-diameter space has rho_k = 2^{-k}
    const auto tree = fixtures::share(build_radial_partitions(fixtures::two_points(), 2.0, 5));
    const auto v = build_from_labeled_net(tree);
    const auto sp = sigma_prime(v, p);
    rep.result(7, "Weight-sequence constant", sp.value + sp.tail_bound <= 3.0,
               "sigma' = " + fmt("%.15g", sp.value) + " (tail <= " + fmt("%.2g", sp.tail_bound) + ") <= 3");
  }

  const auto models = random_models();
  const double root2 = std::sqrt(2.0);

  if (wanted(8)) {
    const auto t0 = Clock::now();
    std::size_t rows = 0, failed = 0, skipped = 0, flagged = 0;
    double worst = -1e300;
    for (std::size_t i = 0; i < models.size(); ++i) {
      const auto r = check_increment_condition(models[i], canonical_metric(models[i], root2), {0.5, 1.0, 1.5, 2.0},
                                               100000, 7000 + i, 1.0);
      rows += r.rows.size();
      skipped += r.skipped.size();
      flagged += r.flagged.size();
      for (const auto& row : r.rows) {
        if (!row.pass) ++failed;
        worst = std::max(worst, row.exceedance.lower - row.bound);
      }
    }
    const double elapsed = seconds_since(t0);
    rep.result(8, "Increment condition", failed == 0 && flagged == 0 && elapsed < 120.0,
               std::to_string(rows) + " (pair, u) rows over 10 models, " + std::to_string(failed) +
                   " violations, max (lower Wilson - 2exp(-u^2)) " + fmt("%.4g", worst) + ", " +
                   std::to_string(skipped) + " zero-distance pairs skipped, " + fmt("%.1f s", elapsed));
  }

  std::vector<NormalizedInstance> normalized;
  std::vector<std::vector<Codes>> model_codes;
  if (wanted(9) || wanted(10)) {
    for (const auto& m : models) {
      normalized.push_back(normalize_instance(m, root2));
      const auto& inst = normalized.back();
      const auto tree = fixtures::share(build_radial_partitions(inst.metric, 2.0, 60));
      model_codes.push_back(all_constructions({"", inst.metric, ProbabilityMeasure::uniform(m.size()), 2.0, tree}));
    }
  }

  if (wanted(9)) {
    std::size_t rows = 0, failed = 0;
    double max_rate = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i)
      for (const auto& c : model_codes[i]) {
        const auto r = check_tail_bound(normalized[i].model, normalized[i].metric, c.vlc, p, 0, {1.0, 1.5, 2.0},
                                      100000, 8000 + i);
        for (const auto& row : r.rows) {
          ++rows;
          if (!row.pass) ++failed;
          max_rate = std::max(max_rate, row.violation.rate);
        }
      }
    rep.result(9, "Chaining tail bound", failed == 0,
               std::to_string(rows) + " (model, construction, u) rows, " + std::to_string(failed) +
                   " violations, largest observed rate " + fmt("%.3g", max_rate) + " (bound at u=2: " +
                   fmt("%.3g", std::exp(-4.0)) + ")");
  }

  if (wanted(10)) {
    std::size_t checks = 0, failed = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i)
      for (const auto& c : model_codes[i]) {
        const auto r = check_corollary(normalized[i].model, c.vlc, p, 100000, 9000 + i);
        ++checks;
        if (!r.pass) ++failed;
        worst = std::max(worst, (r.expected_sup.value - r.expected_sup.half_width) / r.bound);
      }
    rep.result(10, "Expected supremum bound", failed == 0,
               std::to_string(checks) + " (model, construction) checks, max (E sup - CI) / (2 sup sigma_bar) " +
                   fmt("%.4g", worst));
  }

  if (wanted(11)) {
    const auto two = estimate_sup(GaussianModel::iid(2), {0, 1}, 100000, 11);
    const auto four = estimate_sup(GaussianModel::iid(4), {0, 1, 2, 3}, 100000, 11);
    const bool ok = std::abs(two.value - 0.5642) <= 0.01 && std::abs(four.value - 1.0294) <= 0.01;
    rep.result(11, "Gaussian anchors", ok,
               "E max of 2 = " + fmt("%.5f", two.value) + " (0.5642), E max of 4 = " + fmt("%.5f", four.value) +
                   " (1.0294), n = 100000");
  }

  if (wanted(12)) {
    const auto t0 = Clock::now();
    double worst = 0.0, iid = 0.0;
    std::string where;
    for (const auto& lc : lower_suite(false)) {
      const double s = sup_ratio(lc.model, lower_mc);
      if (lc.name.rfind("iid", 0) == 0) iid = std::max(iid, s);
      if (s > worst) {
        worst = s;
        where = lc.name;
      }
    }
    const double elapsed = seconds_since(t0);
    rep.result(12, "Lower-bound stability", worst <= 1.5 * kLowerBoundConstant && elapsed < 300.0,
               "max sup-ratio " + fmt("%.4f", worst) + " (" + where + ") vs 1.5 C = " +
                   fmt("%.4f", 1.5 * kLowerBoundConstant) + ", C = " + fmt("%.4f", kLowerBoundConstant) +
                   " frozen, iid recomputed " + fmt("%.4f", iid) + ", " + fmt("%.1f s", elapsed));
  }

  if (wanted(13)) {
    std::size_t worse = 0, inconsistent = 0;
    double best_gain = 0.0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      OptimizerConfig cfg;
      cfg.seed = i;
      const auto mm = optimize_majorizing_measure(suite[i].space, cfg);
      if (mm.value > mm.uniform_value + 1e-12) ++worse;
      best_gain = std::max(best_gain, mm.uniform_value - mm.value);
      for (const auto* mu : {&mm.measure}) {
        double sup = 0.0;
        for (std::size_t t = 0; t < suite[i].space.size(); ++t)
          sup = std::max(sup, ft_functional(suite[i].space, *mu, t));
        if (m_functional(suite[i].space, *mu, *mu) > sup + 1e-12) ++inconsistent;
      }
      const auto fb = fernique_self_bound(suite[i].space, cfg);
      if (!fb.consistent) ++inconsistent;
    }
    rep.result(13, "Optimizer sanity", worse == 0 && inconsistent == 0,
               std::to_string(suite.size()) + " instances, " + std::to_string(worse) + " worse than uniform, " +
                   std::to_string(inconsistent) + " with M(mu,mu) > sup I_mu; largest improvement " +
                   fmt("%.4g", best_gain));
  }

  return rep.unexpected() == 0 ? 0 : 1;
}
