#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chaining/metric_space.hpp"
#include "chaining/vlc.hpp"
#include "chaining/weights.hpp"

namespace chaining {

/// Centered Gaussian vector (X_t) with covariance K over labeled points.
class GaussianModel {
 public:
  GaussianModel(std::vector<std::string> labels, Eigen::MatrixXd cov);

  /// K_ij = exp(-|x_i - x_j|^2 / (2 l^2)).
  static GaussianModel rbf(const std::vector<std::vector<double>>& points, double lengthscale,
                           std::vector<std::string> labels = {});
  static GaussianModel iid(std::size_t m, double variance = 1.0);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t index_of(const std::string& label) const;
  const Eigen::MatrixXd& covariance() const { return cov_; }

  GaussianModel scaled(double factor) const;

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd cov_;
};

/// d(s,t) = scale * sqrt(K_ss + K_tt - 2 K_st).
MetricSpace canonical_metric(const GaussianModel& model, double scale = 1.0);

/// A model rescaled so that `scale` * canonical metric has diameter one, and that metric.
struct NormalizedInstance {
  GaussianModel model;
  MetricSpace metric;
  double factor = 1.0;  // original diameter
};
NormalizedInstance normalize_instance(const GaussianModel& model, double scale = 1.0);

/// Factor F with F F^T = K, from pivoted LDL^T with diagonal jitter escalation
/// 1e-12 .. 1e-8 when the pivots go negative.
class GaussianSampler {
 public:
  explicit GaussianSampler(const GaussianModel& model);

  std::size_t size() const { return static_cast<std::size_t>(factor_.rows()); }
  double jitter() const { return jitter_; }

  /// Rows of `out` receive independent draws; batch b of a run uses substream b.
  void draw(Eigen::Ref<Eigen::MatrixXd> out, std::uint64_t seed, std::uint64_t stream) const;

 private:
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

inline constexpr std::size_t kSampleBatch = 4096;

/// n draws of N(0, K) as rows; bit-identical for a given (model, n, seed).
Eigen::MatrixXd sample(const GaussianModel& model, std::size_t n, std::uint64_t seed);

/// Calls fn(batch_index, batch) for consecutive batches of at most kSampleBatch
/// rows; batches may run concurrently.
void for_each_batch(const GaussianSampler& sampler, std::size_t n, std::uint64_t seed,
                    const std::function<void(std::size_t, const Eigen::MatrixXd&)>& fn);

struct McEstimate {
  double value = 0.0;
  double half_width = 0.0;  // 95% normal-approximation
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Mean and variance accumulator with an associative merge.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x);
  void merge(const RunningStats& other);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

McEstimate to_estimate(const RunningStats& stats, std::uint64_t seed);

/// Monte Carlo E[sup_{t in subset} X_t], or E[sup |X_t - X_{t0}|] when centered.
McEstimate estimate_sup(const GaussianModel& model, const PointSet& subset, std::size_t n,
                        std::uint64_t seed, std::optional<std::size_t> centered_at = std::nullopt);

/// The same estimate from a fixed matrix of draws (common random numbers).
McEstimate estimate_sup(const Eigen::MatrixXd& draws, const PointSet& subset, std::uint64_t seed);

struct Proportion {
  double rate = 0.0;
  double lower = 0.0;  // Wilson 95%
  double upper = 0.0;
};
Proportion wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

struct IncrementRow {
  std::size_t s = 0;
  std::size_t t = 0;
  double u = 0.0;
  Proportion exceedance;
  double bound = 0.0;
  bool pass = true;
};

struct IncrementReport {
  std::vector<IncrementRow> rows;
  std::vector<std::pair<std::size_t, std::size_t>> skipped;  // zero-distance pairs
  std::vector<std::pair<std::size_t, std::size_t>> flagged;  // skipped pairs with X_s != X_t
  double tail_exponent = 1.0;
  bool pass = true;
};

/// Empirical P[|X_s - X_t| >= u d(s,t)] against 2 exp(-tail_exponent u^2) for every pair.
IncrementReport check_increment_condition(const GaussianModel& model, const MetricSpace& metric,
                                          const std::vector<double>& u_grid, std::size_t n,
                                          std::uint64_t seed, double tail_exponent = 1.0);

struct TailRow {
  double u = 0.0;
  Proportion violation;
  double bound = 0.0;
  bool pass = true;
};

struct TailBoundReport {
  std::vector<TailRow> rows;
  std::vector<double> sigma_bar;  // per point
  bool pass = true;
};

/// Empirical P[exists t: |X_t - X_{t0}| > sigma_bar(t) (u + 1)] against exp(-u^2).
TailBoundReport check_tail_bound(const GaussianModel& model, const MetricSpace& metric,
                              const VlcSequence& vlc, const WeightSequence& p, std::size_t t0,
                              const std::vector<double>& u_grid, std::size_t n, std::uint64_t seed);

struct CorollaryReport {
  McEstimate expected_sup;
  double sup_sigma_bar = 0.0;
  double bound = 0.0;  // 2 sup_t sigma_bar(t)
  bool pass = true;
};

/// E[sup_t X_t] - CI <= 2 sup_t sigma_bar(t).
CorollaryReport check_corollary(const GaussianModel& model, const VlcSequence& vlc,
                                const WeightSequence& p, std::size_t n, std::uint64_t seed);

}  // namespace chaining
