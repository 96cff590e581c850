#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "chaining/partition_tree.hpp"
#include "fixtures.hpp"

using namespace chaining;
using fixtures::line3;

namespace {

std::vector<PointSet> cells_at(const PartitionTree& t, std::size_t k) {
  std::vector<PointSet> out;
  for (const auto& c : t.level(k)) out.push_back(c.members);
  std::sort(out.begin(), out.end());
  return out;
}

bool has_kind(const Diagnostics& d, const std::string& kind) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.kind == kind; });
}

}  // namespace

TEST_CASE("one point: a singleton cell at every level") {
  const MetricSpace s({"x"}, Eigen::MatrixXd::Zero(1, 1));
  const auto t = build_radial_partitions(s, 2.0, 4);
  CHECK(t.terminal());
  for (std::size_t k = 0; k < 6; ++k) CHECK(t.cell_of(k, 0).members == PointSet{0});
  CHECK(validate_tree(t, s).empty());
}

TEST_CASE("two points at distance one split at level one") {
  const auto s = fixtures::two_points();
  const auto t = build_radial_partitions(s, 2.0, 3);
  CHECK(cells_at(t, 1) == std::vector<PointSet>{{0}, {1}});
  CHECK(cells_at(t, 2) == cells_at(t, 1));
  CHECK(cells_at(t, 3) == cells_at(t, 1));
  CHECK(t.terminal());
  CHECK(validate_tree(t, s).empty());
}

TEST_CASE("line carving follows label order") {
  const auto s = line3();
  const auto t = build_radial_partitions(s, 2.0, 2);
  CHECK(cells_at(t, 1) == std::vector<PointSet>{{0, 1}, {2}});
  CHECK(cells_at(t, 2) == std::vector<PointSet>{{0}, {1}, {2}});
  CHECK(t.cell_of(1, 1).members == PointSet{0, 1});
  CHECK(t.cell_of(0, 2).members == PointSet{0, 1, 2});
  CHECK(t.cell_of(1, 0).representative == 0);
  CHECK(t.level(1)[t.cell_index(1, 2)].child_index == 2);
  CHECK(validate_tree(t, s).empty());
  CHECK(t.resolution(0) == doctest::Approx(1.0));
  CHECK(t.resolution(2) == doctest::Approx(0.25));
  CHECK_THROWS_AS(t.cell_of(1, 7), ParameterError);
}

TEST_CASE("builder preconditions") {
  CHECK_THROWS_AS(build_radial_partitions(line3(), 1.5, 3), ParameterError);
  CHECK_THROWS_AS(build_radial_partitions(line3(), 2.0, 0), ParameterError);
  CHECK_THROWS_AS(build_radial_partitions(fixtures::two_points(2.0), 2.0, 3), ParameterError);
}

TEST_CASE("validate_tree reports broken trees") {
  const auto s = line3();
  // level-2 cell {b,c} straddles the level-1 cells {a,b} and {c}
  std::vector<std::vector<Cell>> bad{
      {Cell{{0, 1, 2}, 0, kNoParent, 1}},
      {Cell{{0, 1}, 0, 0, 1}, Cell{{2}, 2, 0, 2}},
      {Cell{{0}, 0, 0, 1}, Cell{{1, 2}, 1, 1, 1}}};
  CHECK(has_kind(validate_tree(PartitionTree(2.0, 3, bad, false), s), "nesting"));

  const auto four = MetricSpace::euclidean({{0.0}, {0.6}, {0.8}, {1.0}}, {"a", "b", "c", "d"});
  std::vector<std::vector<Cell>> wide{{Cell{{0, 1, 2, 3}, 0, kNoParent, 1}},
                                      {Cell{{0, 1}, 0, 0, 1}, Cell{{2, 3}, 2, 0, 2}}};
  const auto d = validate_tree(PartitionTree(2.0, 4, wide, false), four);
  CHECK(has_kind(d, "diameter"));

  std::vector<std::vector<Cell>> gap{{Cell{{0, 1, 2}, 0, kNoParent, 1}},
                                     {Cell{{0, 1}, 0, 0, 1}, Cell{{2}, 2, 0, 3}}};
  CHECK(has_kind(validate_tree(PartitionTree(2.0, 3, gap, false), s), "child_index"));

  std::vector<std::vector<Cell>> hole{{Cell{{0, 1, 2}, 0, kNoParent, 1}}, {Cell{{0, 1}, 2, 0, 1}}};
  const auto h = validate_tree(PartitionTree(2.0, 3, hole, false), s);
  CHECK(has_kind(h, "cover"));
  CHECK(has_kind(h, "representative"));
}

TEST_CASE("random trees: nesting, resolution and child counts") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const double r = 2.0 + static_cast<double>(seed % 3);
    const auto s = fixtures::random_space(2 + seed % 18, 1 + seed % 3, seed);
    const auto t = build_radial_partitions(s, r, 40);
    REQUIRE(t.terminal());
    CHECK(validate_tree(t, s).empty());
    for (std::size_t k = 0; k + 1 <= t.depth(); ++k) {
      for (std::size_t p = 0; p < s.size(); ++p) {
        const auto& inner = t.cell_of(k + 1, p).members;
        const auto& outer = t.cell_of(k, p).members;
        CHECK(std::includes(outer.begin(), outer.end(), inner.begin(), inner.end()));
        CHECK(s(p, t.cell_of(k, p).representative) <= t.resolution(k) + 1e-12);
      }
      // Sibling centers are more than rho/2 apart, so each rho/4 ball holds at most one.
      const double rho = std::pow(r, -static_cast<double>(k + 1));
      for (std::size_t b = 0; b < t.level(k).size(); ++b) {
        const auto& members = t.level(k)[b].members;
        CHECK(t.children(k, b).size() <= covering_number(s, members, rho / 4.0).count);
      }
    }
  }
}

TEST_CASE("builds are deterministic") {
  const auto s = fixtures::random_space(25, 2, 77);
  const auto a = build_radial_partitions(s, 3.0, 20);
  const auto b = build_radial_partitions(s, 3.0, 20);
  REQUIRE(a.depth() == b.depth());
  for (std::size_t k = 0; k <= a.depth(); ++k) {
    REQUIRE(a.level(k).size() == b.level(k).size());
    for (std::size_t i = 0; i < a.level(k).size(); ++i) {
      CHECK(a.level(k)[i].members == b.level(k)[i].members);
      CHECK(a.level(k)[i].representative == b.level(k)[i].representative);
      CHECK(a.level(k)[i].child_index == b.level(k)[i].child_index);
    }
  }
}

TEST_CASE("depth limit leaves a non-terminal tree") {
  const auto s = fixtures::random_space(20, 2, 4);
  const auto t = build_radial_partitions(s, 2.0, 1);
  CHECK(t.depth() == 1);
  CHECK_FALSE(t.terminal());
  CHECK(validate_tree(t, s).empty());
}
