#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>

#include "doctest.h"
#include "switchlab/error.hpp"
#include "switchlab/restrictions.hpp"

using namespace switchlab;

TEST_CASE("sample_uniform") {
  std::vector<VarId> vars;
  for (std::uint32_t i = 0; i < 100; ++i) vars.push_back(VarId{i});
  Rng rng(4);
  CHECK(sample_uniform(vars, 1.0, rng).empty());
  CHECK(sample_uniform(vars, 0.0, rng).size() == 100);
  long stars = 0;
  const long draws = 1000;  // 10^5 variable draws
  for (long i = 0; i < draws; ++i) stars += 100 - static_cast<long>(sample_uniform(vars, 0.3, rng).size());
  const double n = 1e5;
  CHECK(std::abs(stars - 0.3 * n) < 3 * std::sqrt(n * 0.3 * 0.7));
  CHECK_THROWS_AS(sample_uniform(vars, 1.5, rng), PreconditionError);
}

TEST_CASE("grid parameters") {
  CHECK_NOTHROW((GridParams{48, 2}).validate());
  CHECK_NOTHROW((GridParams{108, 3}).validate());
  CHECK_THROWS_AS((GridParams{50, 2}).validate(), PreconditionError);
  CHECK_THROWS_AS((GridParams{64, 2}).validate(), PreconditionError);   // m = 4
  CHECK_NOTHROW((GridParams{64, 2}).validate(false));
  CHECK_THROWS_AS((GridParams{32, 2}).validate(false), PreconditionError);  // m = 2
}

TEST_CASE("layout_centers") {
  GridParams p{108, 3};
  CHECK(p.T() == 36);
  auto c = layout_centers(p);
  CHECK(c.size() == static_cast<std::size_t>(3 * 3 * 3));
  for (int s = 0; s < 9; ++s) {
    for (int q = 0; q + 1 < 3; ++q) {
      CHECK(c[s * 3 + q + 1].row - c[s * 3 + q].row == 9);
      CHECK(c[s * 3 + q + 1].col - c[s * 3 + q].col == 9);
    }
    // Inside the central 27x27 square [4.5, 31.5) of the subgrid.
    for (int q = 0; q < 3; ++q) {
      const int r = c[s * 3 + q].row % 36;
      CHECK(r >= 5);
      CHECK(r < 32);
    }
  }
}

TEST_CASE("path atlas disjointness") {
  for (int d : {2, 3, 4}) {
    GridParams p{3 * 4 * d * d, d};
    auto atlas = build_path_atlas(p);
    auto rep = validate_disjointness(atlas);
    CHECK_MESSAGE(rep.pass, "delta " << d);
    CHECK(rep.paths == static_cast<std::size_t>(9 * 2 * d * d));
    for (const auto& s : rep.shared) CHECK(s.max_distance <= d);
    // Each path starts and ends with at most delta lateral steps.
    for (const auto& path : atlas.paths()) {
      CHECK(path.edges.front() != path.edges.back());
    }
  }
}

TEST_CASE("mutated atlas fails with a located violation") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  // Pair (0,0) shifted onto the join row of pair (1,0), whose row segment
  // spans the same columns.
  const int idx = atlas.path_index(0, 1, 0, 0);
  auto shifted = build_path(p, 0, 1, 0, 0, 2);
  auto mutated = atlas.with_path(idx, shifted);
  auto rep = validate_disjointness(mutated);
  CHECK_FALSE(rep.pass);
  REQUIRE_FALSE(rep.violations.empty());
  CHECK(rep.violations[0].find("edge") != std::string::npos);
}

TEST_CASE("associated_center") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  // Vertex (0,0) lies on no path, so its right edge has no center.
  CHECK_FALSE(associated_center(atlas, atlas.grid().edge(0, 0, 0)).has_value());
  const auto& path = atlas.paths()[atlas.path_index(4, 1, 1, 0)];
  const auto mid = path.edges[path.edges.size() / 2];
  auto ac = associated_center(atlas, mid);
  REQUIRE(ac.has_value());
  CHECK(ac->far.size() == 1);
  auto first = associated_center(atlas, path.edges.front());
  REQUIRE(first.has_value());
  CHECK(first->center == path.center_a);
  CHECK(first->far.size() >= 1);
  CHECK(first->far.size() <= 2);
  for (int f : first->far) CHECK(atlas.subgrid_of_center(f) == path.subgrid_b);
}

TEST_CASE("grid restriction structure") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto rho = sample_grid_restriction(atlas, rng);
    CHECK(rho.new_grid.n() == 3);
    std::size_t live = 0;
    for (auto v : rho.new_var) live += v >= 0 ? 1 : 0;
    std::size_t path_edges = 0;
    for (int pi : rho.live_path) path_edges += atlas.paths()[pi].edges.size();
    CHECK(live == path_edges);
    CHECK(rho.live_path.size() == 18);
    CHECK(projected_charge(rho, atlas) == constant_charge(9, true));
    for (int k = 0; k < 10; ++k) {
      std::vector<std::uint8_t> y(18);
      for (auto& b : y) b = rng.bit();
      CHECK(violated_noncenter_vertices(rho, atlas, back_substitute(rho, y)).empty());
    }
    // All edges of a path map to one new variable.
    for (std::size_t v = 0; v < rho.live_path.size(); ++v) {
      for (VarId e : atlas.paths()[rho.live_path[v]].edges) {
        auto img = apply_grid_restriction(rho, e);
        REQUIRE(std::holds_alternative<Mapped>(img));
        CHECK(std::get<Mapped>(img).new_var.index == v);
      }
    }
    auto back = grid_restriction_from_json(to_json(rho), atlas);
    CHECK(back.values == rho.values);
    CHECK(back.new_var == rho.new_var);
    CHECK(back.negated == rho.negated);
  }
}

TEST_CASE("grid restriction on the Delta=3 instance") {
  GridParams p{108, 3};
  auto atlas = build_path_atlas(p);
  Rng rng(5);
  auto rho = sample_grid_restriction(atlas, rng);
  CHECK(rho.new_grid.n() == 3);
  CHECK(rho.new_charge == constant_charge(9, true));
  CHECK(projected_charge(rho, atlas) == rho.new_charge);
  std::vector<std::uint8_t> y(18, 1);
  CHECK(violated_noncenter_vertices(rho, atlas, back_substitute(rho, y)).empty());
}

TEST_CASE("chosen centers are uniform") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  Rng rng(8);
  const int n = 2000;
  std::vector<std::vector<long>> counts(9, std::vector<long>(2, 0));
  for (int i = 0; i < n; ++i) {
    auto rho = sample_grid_restriction(atlas, rng);
    for (int s = 0; s < 9; ++s) ++counts[s][rho.chosen[s]];
  }
  for (int s = 0; s < 9; ++s) {
    double stat = 0;
    for (long c : counts[s]) stat += (c - n / 2.0) * (c - n / 2.0) / (n / 2.0);
    boost::math::chi_squared dist(1.0);
    CHECK(boost::math::cdf(boost::math::complement(dist, stat)) > 0.001);
  }
}
