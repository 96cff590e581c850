#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chaining/vlc.hpp"
#include "fixtures.hpp"

using namespace chaining;
using fixtures::line3;
using fixtures::share;

namespace {

bool has_kind(const Diagnostics& d, const std::string& kind) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.kind == kind; });
}

std::shared_ptr<const PartitionTree> line_tree() {
  return share(build_radial_partitions(line3(), 2.0, 2));
}

// Chain of single children: {a,b} at every level, then the pair splits only at level 4.
std::shared_ptr<const PartitionTree> chain_tree() {
  std::vector<std::vector<Cell>> levels{{Cell{{0, 1}, 0, kNoParent, 1}}};
  for (int k = 1; k <= 3; ++k) levels.push_back({Cell{{0, 1}, 0, 0, 1}});
  levels.push_back({Cell{{0}, 0, 0, 1}, Cell{{1}, 1, 0, 2}});
  return share(PartitionTree(2.0, 2, levels, true, 1.0));
}

// Complete binary tree over 8 points.
std::shared_ptr<const PartitionTree> binary_tree() {
  std::vector<std::vector<Cell>> levels{{Cell{{0, 1, 2, 3, 4, 5, 6, 7}, 0, kNoParent, 1}}};
  for (std::size_t size = 4; size >= 1; size /= 2) {
    std::vector<Cell> next;
    const auto& prev = levels.back();
    for (std::size_t b = 0; b < prev.size(); ++b) {
      const auto& m = prev[b].members;
      next.push_back(Cell{PointSet(m.begin(), m.begin() + size), m[0], b, 1});
      next.push_back(Cell{PointSet(m.begin() + size, m.end()), m[size], b, 2});
    }
    levels.push_back(std::move(next));
  }
  return share(PartitionTree(2.0, 8, levels, true, 1.0));
}

std::vector<std::shared_ptr<const PartitionTree>> random_trees() {
  std::vector<std::shared_ptr<const PartitionTree>> out;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = fixtures::random_space(2 + seed % 30, 1 + seed % 2, 100 + seed);
    out.push_back(share(build_radial_partitions(s, 2.0 + static_cast<double>(seed % 3), 40)));
  }
  return out;
}

}  // namespace

TEST_CASE("kraft sums") {
  CHECK(kraft_sum(std::vector<int>{1, 2, 2}) == 1.0);
  CHECK(kraft_sum(std::vector<int>{1, 1, 1}) == 1.5);
  CHECK(kraft_sum(std::vector<int>{0}) == 1.0);
  CHECK(kraft_sum(std::vector<double>{std::log2(3.0), std::log2(3.0), std::log2(3.0)}) ==
        doctest::Approx(1.0));
}

TEST_CASE("shannon lengths") {
  CHECK(shannon_lengths(std::vector<double>{0.5, 0.25, 0.25}) == std::vector<int>{1, 2, 2});
  CHECK(shannon_lengths(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) == std::vector<int>{2, 2, 2});
  CHECK(shannon_lengths(std::vector<double>{1.0}) == std::vector<int>{1});
  CHECK(shannon_lengths(std::vector<double>{1.0}, false) == std::vector<int>{0});
  CHECK_THROWS_AS(shannon_lengths(std::vector<double>{0.5, 0.0}), InfiniteLengthError);
  CHECK(snapped_ceil(3.0 + 1e-12) == 3);
  CHECK(snapped_ceil(3.0 + 1e-6) == 4);
}

TEST_CASE("ceiling never pushes the Kraft sum above one") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto mu = fixtures::random_measure(2 + seed % 40, seed);
    CHECK(kraft_sum(shannon_lengths(mu.weights())) <= 1.0 + 1e-12);
  }
}

TEST_CASE("measure codes: examples") {
  const auto two = share(build_radial_partitions(fixtures::two_points(), 2.0, 3));
  const auto v2 = build_from_measures(two, ProbabilityMeasure::uniform(2), uniform_conditionals(*two));
  CHECK(v2.level_lengths(1) == std::vector<int>{1, 1});

  // mu_1({a,b}) = 2/3, mu_1({c}) = 1/3 and a uniform split of {a,b} give mu_2 = (1/3, 1/3, 1/3)
  const auto tree = line_tree();
  const auto v = build_from_measures(tree, ProbabilityMeasure::uniform(3), uniform_conditionals(*tree));
  for (std::size_t t = 0; t < 3; ++t) CHECK(v.length(2, t) == 2);
  CHECK(v.length(1, 0) == 1);
  CHECK(v.length(1, 2) == 2);
  CHECK(v.ideal_length(2, 1) == doctest::Approx(std::log2(3.0)));
  CHECK(validate_admissible(v, line3()).empty());
}

TEST_CASE("measure recursion is monotone") {
  for (const auto& tree : random_trees()) {
    const auto mu = fixtures::random_measure(tree->num_points(), tree->depth());
    for (const auto& cond : {uniform_conditionals(*tree), conditionals_from_measure(*tree, mu)}) {
      const auto chain = chain_measures(*tree, mu, cond);
      for (std::size_t k = 1; k < tree->depth(); ++k) {
        for (std::size_t t = 0; t < tree->num_points(); ++t) {
          const auto& inner = tree->cell_of(k + 1, t).members;
          const auto& outer = tree->cell_of(k, t).members;
          CHECK(chain[k + 1].mass(inner) <= chain[k].mass(outer) + 1e-12);
        }
      }
      CHECK(validate_admissible(build_from_measures(tree, mu, cond)).empty());
    }
  }
}

TEST_CASE("conditionals leaking outside the parent are rejected") {
  const auto tree = line_tree();
  auto cond = uniform_conditionals(*tree);
  cond[1][0] = ProbabilityMeasure({0.5, 0.0, 0.5});  // cell {a,b} sends mass to c
  CHECK_THROWS_AS(chain_measures(*tree, ProbabilityMeasure::uniform(3), cond), StructuralError);
}

TEST_CASE("labeled net increments") {
  const double slack = std::log2(std::numbers::pi * std::numbers::pi / 6.0) + 1.0;
  const auto chain = build_from_labeled_net(chain_tree());
  for (std::size_t k = 1; k <= 3; ++k) {
    const int step = chain.length(k + 1, 0) - chain.length(k, 0);
    CHECK(step >= 0);
    CHECK(step <= 1);
  }
  const auto bin = build_from_labeled_net(binary_tree());
  for (std::size_t t = 0; t < 8; ++t) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double ideal_step = bin.ideal_length(k + 1, t) - bin.ideal_length(k, t);
      CHECK(ideal_step <= 2.0 + slack - 1.0 + 1e-12);
      CHECK(bin.length(k + 1, t) - bin.length(k, t) <= 3);
    }
  }
  CHECK(validate_admissible(bin).empty());
  CHECK(3.71803 == doctest::Approx(2.0 + slack).epsilon(1e-5));
}

TEST_CASE("labeled net rejects bad labels") {
  const auto tree = binary_tree();
  auto labels = child_index_labels(*tree);
  labels[1][1] = 3;
  CHECK_THROWS_AS(build_from_labeled_net(tree, labels), StructuralError);
}

TEST_CASE("labeled net increments hold on random trees") {
  const double slack = std::log2(std::numbers::pi * std::numbers::pi / 6.0) + 1.0;
  for (const auto& tree : random_trees()) {
    const auto v = build_from_labeled_net(tree);
    CHECK(validate_admissible(v).empty());
    for (std::size_t t = 0; t < tree->num_points(); ++t) {
      for (std::size_t k = 0; k < tree->depth(); ++k) {
        const double label = static_cast<double>(tree->cell_of(k + 1, t).child_index);
        CHECK(v.length(k + 1, t) - v.length(k, t) <= 2.0 * std::log2(label) + slack + 1e-12);
      }
    }
  }
}

TEST_CASE("single measure codes") {
  const auto two = share(build_radial_partitions(fixtures::two_points(), 2.0, 3));
  CHECK(build_from_single_measure(two, ProbabilityMeasure::uniform(2)).level_lengths(1) ==
        std::vector<int>{1, 1});

  const auto tree = line_tree();
  const auto v = build_from_single_measure(tree, ProbabilityMeasure::uniform(3));
  CHECK(v.length(1, 0) == 1);
  CHECK(v.length(1, 1) == 1);
  CHECK(v.length(1, 2) == 2);
  for (std::size_t t = 0; t < 3; ++t) CHECK(v.length(2, t) == 2);

  const auto s = fixtures::random_space(11, 2, 8);
  const auto t11 = share(build_radial_partitions(s, 2.0, 40));
  const auto u = build_from_single_measure(t11, ProbabilityMeasure::uniform(11));
  for (std::size_t t = 0; t < 11; ++t) CHECK(u.length(t11->depth(), t) == 4);

  CHECK_THROWS_AS(build_from_single_measure(tree, ProbabilityMeasure({0.5, 0.5, 0.0})),
                  InfiniteLengthError);
}

TEST_CASE("single measure increments follow the mass ratio") {
  for (const auto& tree : random_trees()) {
    const auto mu = fixtures::random_measure(tree->num_points(), 7);
    const auto v = build_from_single_measure(tree, mu);
    CHECK(validate_admissible(v).empty());
    for (std::size_t t = 0; t < tree->num_points(); ++t)
      for (std::size_t k = 1; k < tree->depth(); ++k) {
        const double ratio = mu.mass(tree->cell_of(k, t).members) / mu.mass(tree->cell_of(k + 1, t).members);
        CHECK(v.length(k + 1, t) - v.length(k, t) <= std::log2(ratio) + 1.0 + 1e-12);
      }
  }
}

TEST_CASE("mixtures from codes") {
  const auto two = share(build_radial_partitions(fixtures::two_points(), 2.0, 3));
  const auto v = build_from_single_measure(two, ProbabilityMeasure::uniform(2));
  const auto one = mixture_from_codes(v, WeightSequence::from_list({1.0}));
  CHECK(one[0] == doctest::Approx(0.5));
  const auto both = mixture_from_codes(v, WeightSequence::from_list({0.5, 0.5}));
  CHECK(both[0] == doctest::Approx(one[0]));

  const auto tree = line_tree();
  const auto w = build_from_single_measure(tree, ProbabilityMeasure::uniform(3));
  const auto p = WeightSequence::dyadic();
  const auto mu = mixture_from_codes(w, p);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t k = 1; k <= 6; ++k)
      CHECK(-std::log2(mu.mass(tree->cell_of(k, t).members)) <= w.length(k, t) - std::log2(p(k)) + 1e-12);
}

TEST_CASE("mixture inequality on random codes") {
  const auto p = WeightSequence::dyadic();
  for (const auto& tree : random_trees()) {
    for (const auto& v : {build_from_labeled_net(tree),
                          build_from_single_measure(tree, ProbabilityMeasure::uniform(tree->num_points()))}) {
      const auto mu = mixture_from_codes(v, p);
      for (std::size_t t = 0; t < tree->num_points(); ++t)
        for (std::size_t k = 1; k <= tree->depth() + 2; ++k)
          CHECK(-std::log2(mu.mass(tree->cell_of(k, t).members)) <= v.length(k, t) - std::log2(p(k)) + 1e-9);
    }
  }
}

TEST_CASE("single-measure comparison against recursive measures") {
  const auto p = WeightSequence::dyadic();
  for (const auto& tree : random_trees()) {
    const auto mu1 = fixtures::random_measure(tree->num_points(), 3);
    const auto cond = uniform_conditionals(*tree);
    const auto v = build_from_measures(tree, mu1, cond);
    const auto mix = mixture_of_chain(chain_measures(*tree, mu1, cond), p);
    const auto w = build_from_single_measure(tree, mix);
    for (std::size_t t = 0; t < tree->num_points(); ++t)
      for (std::size_t k = 1; k <= tree->depth() + 2; ++k) {
        const double extra = std::log2(2.0 / p(k));
        CHECK(w.length(k, t) <= v.length(k, t) + extra + 1.0 + 1e-12);
        CHECK(w.ideal_length(k, t) <= v.ideal_length(k, t) + extra + 1e-12);
      }
  }
}

TEST_CASE("admissibility violations") {
  const auto tree = line_tree();
  const auto ok = build_from_single_measure(tree, ProbabilityMeasure::uniform(3));
  CHECK(validate_admissible(ok).empty());

  std::vector<std::vector<int>> dec{{0}, {1, 2}, {1, 1, 1}};
  std::vector<std::vector<double>> dec_ideal{{0}, {1, 2}, {1, 1, 1}};
  CHECK(has_kind(validate_admissible(VlcSequence(tree, dec, dec_ideal)), "monotone"));

  std::vector<std::vector<int>> loud{{0}, {1, 1}, {1, 1, 1}};
  std::vector<std::vector<double>> loud_ideal{{0}, {1, 1}, {1, 1, 1}};
  CHECK(has_kind(validate_admissible(VlcSequence(tree, loud, loud_ideal)), "kraft"));

  std::vector<std::vector<int>> zero{{0}, {0, 1}, {2, 2, 2}};
  std::vector<std::vector<double>> zero_ideal{{0}, {0, 1}, {2, 2, 2}};
  CHECK(has_kind(validate_admissible(VlcSequence(tree, zero, zero_ideal)), "min_length"));

  const auto shallow = share(build_radial_partitions(fixtures::random_space(20, 2, 1), 2.0, 1));
  CHECK(has_kind(validate_admissible(build_from_labeled_net(shallow)), "resolution"));
}

TEST_CASE("lengths past the stored depth") {
  const auto tree = line_tree();
  const auto v = build_from_single_measure(tree, ProbabilityMeasure::uniform(3));
  CHECK(v.length(9, 1) == v.length(2, 1));
  std::vector<std::vector<int>> l{{0}, {1, 2}, {2, 2, 2}};
  std::vector<std::vector<double>> i{{0}, {1, 2}, {2, 2, 2}};
  const VlcSequence grow(tree, l, i, 2);
  CHECK(grow.length(5, 0) == 8);
  CHECK(grow.ideal_length(5, 0) == doctest::Approx(8.0));
}

TEST_CASE("canonical code words are prefix free") {
  const std::vector<int> lengths{2, 1, 3, 3};
  const auto words = canonical_codewords(lengths);
  REQUIRE(words.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(words[i].size() == static_cast<std::size_t>(lengths[i]));
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) CHECK(words[j].rfind(words[i], 0) != 0);
  }
}
