#pragma once

#include <memory>
#include <random>
#include <vector>

#include "chaining/metric_space.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/rng.hpp"

namespace fixtures {

using namespace chaining;

// d(a,b) = d(b,c) = 0.5, d(a,c) = 1
inline MetricSpace line3() {
  return MetricSpace::euclidean({{0.0}, {0.5}, {1.0}}, {"a", "b", "c"});
}

inline MetricSpace two_points(double d = 1.0) {
  return MetricSpace::euclidean({{0.0}, {d}}, {"a", "b"});
}

inline MetricSpace random_space(std::size_t n, std::size_t dim, std::uint64_t seed, bool normalize = true) {
  Engine eng = make_engine(seed, 17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts)
    for (double& x : p) x = unit(eng);
  MetricSpace s = MetricSpace::euclidean(pts);
  return normalize && n > 1 ? normalize_diameter(s) : s;
}

inline ProbabilityMeasure random_measure(std::size_t n, std::uint64_t seed) {
  Engine eng = make_engine(seed, 29);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = w(eng);
  return ProbabilityMeasure::normalized(v);
}

inline std::shared_ptr<const PartitionTree> share(PartitionTree t) {
  return std::make_shared<const PartitionTree>(std::move(t));
}

}  // namespace fixtures
