#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "chaining/metric_space.hpp"

namespace chaining {

struct OptimizerConfig {
  std::size_t iters = 200;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::size_t restarts = 3;
  double step = 2.0;  // eta_0 in eta = eta_0 / sqrt(iter)
};

struct MajorizingResult {
  ProbabilityMeasure measure;
  double value = 0.0;          // sup_t I_mu(t)
  double uniform_value = 0.0;  // baseline
  std::vector<double> trace;   // best value so far, one entry per round
  std::size_t iterations = 0;
};

/// Heuristic search for mu minimizing sup_t I_mu(t).
///
/// An adversarial distribution q over points follows exponentiated-gradient
/// ascent (step 1/sqrt(iter)); mu takes a mirror-descent step on sum_t q_t I_mu(t),
/// which moves mass toward the balls around heavy-I points. Restart 0 starts at
/// uniform, the rest from seed-derived perturbations. Never worse than uniform.
MajorizingResult optimize_majorizing_measure(const MetricSpace& space, const OptimizerConfig& cfg);

struct SelfBoundResult {
  ProbabilityMeasure measure;
  double value = 0.0;     // M(mu, mu)
  double sup_ft = 0.0;    // sup_t I_mu(t) for the same mu
  double uniform_value = 0.0;
  bool consistent = true; // value <= sup_ft
  std::size_t iterations = 0;
};

/// Hill climbing for sup_mu M(mu, mu): pairwise mass moves plus averaging with
/// the uniform measure on the points of largest I_mu.
SelfBoundResult fernique_self_bound(const MetricSpace& space, const OptimizerConfig& cfg);

/// d/d mu_s of sum_t q_t I_mu(t); mu must charge every point.
std::vector<double> ft_gradient(const MetricSpace& space, const ProbabilityMeasure& mu,
                                const std::vector<double>& q);

}  // namespace chaining
