#include "chaining/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "chaining/functionals.hpp"
#include "chaining/parallel.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/rng.hpp"

namespace chaining {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPsdTolerance = 1e-10;
constexpr double kZ95 = 1.959963984540054;

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
  return labels;
}

}  // namespace

GaussianModel::GaussianModel(std::vector<std::string> labels, Eigen::MatrixXd cov)
    : labels_(std::move(labels)), cov_(std::move(cov)) {
  if (labels_.empty()) throw StructuralError("Gaussian model needs at least one point");
  if (cov_.rows() != cov_.cols() || static_cast<std::size_t>(cov_.rows()) != labels_.size())
    throw StructuralError("covariance must be square and match the labels");
  if (!cov_.allFinite()) throw ModelError("covariance has non-finite entries");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance)
    throw ModelError("covariance is not symmetric");
  cov_ = 0.5 * (cov_ + cov_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTolerance)
    throw ModelError("covariance is not positive semidefinite");
  std::unordered_map<std::string, int> seen;
  for (const auto& l : labels_)
    if (seen[l]++) throw StructuralError("duplicate label '" + l + "'");
}

GaussianModel GaussianModel::rbf(const std::vector<std::vector<double>>& points, double lengthscale,
                                 std::vector<std::string> labels) {
  if (!(lengthscale > 0.0)) throw ParameterError("RBF lengthscale must be positive");
  const std::size_t n = points.size();
  if (n == 0) throw StructuralError("RBF generator needs at least one point");
  if (labels.empty()) labels = default_labels(n);
  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != points[0].size())
      throw StructuralError("RBF points have inconsistent dimensions");
    for (std::size_t j = 0; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t c = 0; c < points[i].size(); ++c) {
        const double d = points[i][c] - points[j][c];
        sq += d * d;
      }
      k(i, j) = std::exp(-sq / (2.0 * lengthscale * lengthscale));
    }
  }
  return GaussianModel(std::move(labels), std::move(k));
}

GaussianModel GaussianModel::iid(std::size_t m, double variance) {
  return GaussianModel(default_labels(m), variance * Eigen::MatrixXd::Identity(m, m));
}

std::size_t GaussianModel::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw LookupError("unknown point '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

GaussianModel GaussianModel::scaled(double factor) const {
  return GaussianModel(labels_, cov_ * (factor * factor));
}

MetricSpace canonical_metric(const GaussianModel& model, double scale) {
  if (!(scale > 0.0)) throw ParameterError("metric scale must be positive");
  const auto& k = model.covariance();
  const std::size_t n = model.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sq = k(i, i) + k(j, j) - 2.0 * k(i, j);
      if (sq < -kPsdTolerance) throw ModelError("negative squared canonical distance");
      d(i, j) = d(j, i) = scale * std::sqrt(std::max(0.0, sq));
    }
  }
  return MetricSpace(model.labels(), std::move(d));
}

NormalizedInstance normalize_instance(const GaussianModel& model, double scale) {
  const MetricSpace metric = canonical_metric(model, scale);
  const double diam = diameter(metric);
  if (!(diam > 0.0)) throw DegenerateSpaceError("canonical metric has zero diameter");
  GaussianModel scaled = model.scaled(1.0 / diam);
  MetricSpace normalized = canonical_metric(scaled, scale);
  return {std::move(scaled), std::move(normalized), diam};
}

GaussianSampler::GaussianSampler(const GaussianModel& model) {
  const Eigen::MatrixXd& k = model.covariance();
  const std::size_t n = model.size();
  const double scale = std::max(1.0, k.diagonal().cwiseAbs().maxCoeff());
  for (double jitter : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
    const Eigen::MatrixXd kj = k + jitter * scale * Eigen::MatrixXd::Identity(n, n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(kj);
    if (ldlt.info() != Eigen::Success) continue;
    Eigen::VectorXd diag = ldlt.vectorD();
    if (diag.minCoeff() < -kPsdTolerance * scale) continue;
    diag = diag.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd lower = ldlt.matrixL();
    Eigen::MatrixXd f = lower * diag.asDiagonal();
    factor_ = ldlt.transpositionsP().transpose() * f;
    jitter_ = jitter * scale;
    return;
  }
  throw ModelError("covariance factorization failed after jitter escalation to 1e-8");
}

void GaussianSampler::draw(Eigen::Ref<Eigen::MatrixXd> out, std::uint64_t seed,
                           std::uint64_t stream) const {
  Engine engine = make_engine(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index rows = out.rows();
  const Eigen::Index m = factor_.rows();
  Eigen::MatrixXd z(rows, m);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < m; ++j) z(i, j) = normal(engine);
  out.noalias() = z * factor_.transpose();
}

void for_each_batch(const GaussianSampler& sampler, std::size_t n, std::uint64_t seed,
                    const std::function<void(std::size_t, const Eigen::MatrixXd&)>& fn) {
  const std::size_t batches = (n + kSampleBatch - 1) / kSampleBatch;
  parallel_for(batches, [&](std::size_t b) {
    const std::size_t rows = std::min(kSampleBatch, n - b * kSampleBatch);
    Eigen::MatrixXd batch(rows, sampler.size());
    sampler.draw(batch, seed, b);
    fn(b, batch);
  });
}

Eigen::MatrixXd sample(const GaussianModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("sample count must be >= 1");
  const GaussianSampler sampler(model);
  Eigen::MatrixXd out(n, model.size());
  for_each_batch(sampler, n, seed, [&](std::size_t b, const Eigen::MatrixXd& batch) {
    out.middleRows(static_cast<Eigen::Index>(b * kSampleBatch), batch.rows()) = batch;
  });
  return out;
}

void RunningStats::add(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(count + other.count);
  const double delta = other.mean - mean;
  mean += delta * static_cast<double>(other.count) / total;
  m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / total;
  count += other.count;
}

McEstimate to_estimate(const RunningStats& stats, std::uint64_t seed) {
  McEstimate e;
  e.value = stats.mean;
  e.samples = stats.count;
  e.seed = seed;
  e.half_width = stats.count > 0 ? kZ95 * std::sqrt(stats.variance() / static_cast<double>(stats.count)) : 0.0;
  return e;
}

namespace {

double row_sup(const Eigen::MatrixXd& draws, Eigen::Index row, const PointSet& subset,
               std::optional<std::size_t> center) {
  double best = -std::numeric_limits<double>::infinity();
  const double origin = center ? draws(row, static_cast<Eigen::Index>(*center)) : 0.0;
  for (std::size_t t : subset) {
    const double x = draws(row, static_cast<Eigen::Index>(t));
    best = std::max(best, center ? std::abs(x - origin) : x);
  }
  return best;
}

void check_subset(const PointSet& subset, std::size_t n) {
  if (subset.empty()) throw ParameterError("supremum over an empty subset");
  for (std::size_t t : subset)
    if (t >= n) throw LookupError("subset point outside the model");
}

}  // namespace

McEstimate estimate_sup(const GaussianModel& model, const PointSet& subset, std::size_t n,
                        std::uint64_t seed, std::optional<std::size_t> centered_at) {
  check_subset(subset, model.size());
  if (n < 1) throw ParameterError("sample count must be >= 1");
  if (centered_at && *centered_at >= model.size()) throw LookupError("center outside the model");
  const GaussianSampler sampler(model);
  const std::size_t batches = (n + kSampleBatch - 1) / kSampleBatch;
  std::vector<RunningStats> partial(batches);
  for_each_batch(sampler, n, seed, [&](std::size_t b, const Eigen::MatrixXd& batch) {
    for (Eigen::Index i = 0; i < batch.rows(); ++i) partial[b].add(row_sup(batch, i, subset, centered_at));
  });
  RunningStats total;
  for (const auto& s : partial) total.merge(s);
  return to_estimate(total, seed);
}

McEstimate estimate_sup(const Eigen::MatrixXd& draws, const PointSet& subset, std::uint64_t seed) {
  check_subset(subset, static_cast<std::size_t>(draws.cols()));
  RunningStats stats;
  for (Eigen::Index i = 0; i < draws.rows(); ++i) stats.add(row_sup(draws, i, subset, std::nullopt));
  return to_estimate(stats, seed);
}

Proportion wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0.0, 0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

IncrementReport check_increment_condition(const GaussianModel& model, const MetricSpace& metric,
                                          const std::vector<double>& u_grid, std::size_t n,
                                          std::uint64_t seed, double tail_exponent) {
  if (metric.size() != model.size()) throw StructuralError("metric and model sizes differ");
  if (n < 1) throw ParameterError("sample count must be >= 1");
  for (double u : u_grid)
    if (!(u >= 0.0)) throw ParameterError("u grid values must be >= 0");
  IncrementReport report;
  report.tail_exponent = tail_exponent;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = 0; s < model.size(); ++s) {
    for (std::size_t t = s + 1; t < model.size(); ++t) {
      if (metric(s, t) > 0.0)
        pairs.emplace_back(s, t);
      else
        report.skipped.emplace_back(s, t);
    }
  }
  const std::size_t cols = u_grid.size();
  const GaussianSampler sampler(model);
  const std::size_t batches = (n + kSampleBatch - 1) / kSampleBatch;
  std::vector<std::vector<std::size_t>> hits(batches, std::vector<std::size_t>(pairs.size() * cols, 0));
  std::vector<std::vector<char>> unequal(batches, std::vector<char>(report.skipped.size(), 0));
  for_each_batch(sampler, n, seed, [&](std::size_t b, const Eigen::MatrixXd& x) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [s, t] = pairs[p];
      const double d = metric(s, t);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double diff = std::abs(x(i, static_cast<Eigen::Index>(s)) - x(i, static_cast<Eigen::Index>(t)));
        for (std::size_t c = 0; c < cols; ++c)
          if (diff >= u_grid[c] * d) ++hits[b][p * cols + c];
      }
    }
    for (std::size_t p = 0; p < report.skipped.size(); ++p) {
      const auto [s, t] = report.skipped[p];
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (std::abs(x(i, static_cast<Eigen::Index>(s)) - x(i, static_cast<Eigen::Index>(t))) > 1e-9) {
          unequal[b][p] = 1;
          break;
        }
    }
  });
  for (std::size_t p = 0; p < report.skipped.size(); ++p)
    for (std::size_t b = 0; b < batches; ++b)
      if (unequal[b][p]) {
        report.flagged.push_back(report.skipped[p]);
        break;
      }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t total = 0;
      for (std::size_t b = 0; b < batches; ++b) total += hits[b][p * cols + c];
      IncrementRow row;
      row.s = pairs[p].first;
      row.t = pairs[p].second;
      row.u = u_grid[c];
      row.exceedance = wilson_interval(total, n);
      row.bound = 2.0 * std::exp(-tail_exponent * row.u * row.u);
      row.pass = row.exceedance.lower <= row.bound;
      report.pass = report.pass && row.pass;
      report.rows.push_back(row);
    }
  }
  return report;
}

TailBoundReport check_tail_bound(const GaussianModel& model, const MetricSpace& metric,
                              const VlcSequence& vlc, const WeightSequence& p, std::size_t t0,
                              const std::vector<double>& u_grid, std::size_t n, std::uint64_t seed) {
  const std::size_t m = model.size();
  if (metric.size() != m || vlc.tree().num_points() != m)
    throw StructuralError("model, metric and code sequence sizes differ");
  if (t0 >= m) throw LookupError("reference point outside the model");
  if (n < 1) throw ParameterError("sample count must be >= 1");
  if (!validate_tree(vlc.tree(), metric).empty())
    throw ParameterError("code sequence tree is not a valid partition tree of the metric");
  TailBoundReport report;
  report.sigma_bar.resize(m);
  for (std::size_t t = 0; t < m; ++t) report.sigma_bar[t] = sigma_bar(vlc, p, t).value;

  const std::size_t cols = u_grid.size();
  const GaussianSampler sampler(model);
  const std::size_t batches = (n + kSampleBatch - 1) / kSampleBatch;
  std::vector<std::vector<std::size_t>> hits(batches, std::vector<std::size_t>(cols, 0));
  for_each_batch(sampler, n, seed, [&](std::size_t b, const Eigen::MatrixXd& x) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      // Smallest (u + 1) that the row still violates: max_t |X_t - X_t0| / sigma_bar(t).
      double worst = 0.0;
      const double origin = x(i, static_cast<Eigen::Index>(t0));
      for (std::size_t t = 0; t < m; ++t)
        worst = std::max(worst, std::abs(x(i, static_cast<Eigen::Index>(t)) - origin) / report.sigma_bar[t]);
      for (std::size_t c = 0; c < cols; ++c)
        if (worst > u_grid[c] + 1.0) ++hits[b][c];
    }
  });
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t total = 0;
    for (std::size_t b = 0; b < batches; ++b) total += hits[b][c];
    TailRow row;
    row.u = u_grid[c];
    row.violation = wilson_interval(total, n);
    row.bound = std::exp(-row.u * row.u);
    row.pass = row.violation.lower <= row.bound;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

CorollaryReport check_corollary(const GaussianModel& model, const VlcSequence& vlc,
                                const WeightSequence& p, std::size_t n, std::uint64_t seed) {
  if (vlc.tree().num_points() != model.size())
    throw StructuralError("model and code sequence sizes differ");
  CorollaryReport report;
  PointSet all(model.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  report.expected_sup = estimate_sup(model, all, n, seed);
  for (std::size_t t = 0; t < model.size(); ++t)
    report.sup_sigma_bar = std::max(report.sup_sigma_bar, sigma_bar(vlc, p, t).value);
  report.bound = 2.0 * report.sup_sigma_bar;
  report.pass = report.expected_sup.value - report.expected_sup.half_width <= report.bound;
  return report;
}

}  // namespace chaining
