#include <boost/math/distributions/chi_squared.hpp>

#include "doctest.h"
#include "switchlab/error.hpp"
#include "switchlab/game.hpp"
#include "switchlab/generators.hpp"

using namespace switchlab;

namespace {

BitStream bits(std::uint32_t mask, int n) {
  BitStream out(n);
  for (int i = 0; i < n; ++i) out[i] = (mask >> i) & 1U;
  return out;
}

std::vector<VarId> path_edges(const PathAtlas& atlas) {
  std::vector<VarId> out;
  const auto ne = static_cast<std::uint32_t>(atlas.grid().graph().num_edges());
  for (std::uint32_t e = 0; e < ne; ++e)
    if (!atlas.occurrences(VarId{e}).empty()) out.push_back(VarId{e});
  return out;
}

double chi_square_p(const std::vector<long>& counts) {
  double n = 0;
  for (long c : counts) n += c;
  const double expect = n / counts.size();
  double stat = 0;
  for (long c : counts) stat += (c - expect) * (c - expect) / expect;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

DnfFamily path_family(const PathAtlas& atlas, int s, int k, int terms, Rng& rng) {
  auto pool = path_edges(atlas);
  DnfFamily fam;
  for (int i = 0; i < s; ++i) {
    std::vector<Term> ts;
    for (int t = 0; t < terms; ++t) {
      std::vector<Literal> lits;
      while (static_cast<int>(lits.size()) < k) {
        VarId v = pool[rng.below(pool.size())];
        bool dup = false;
        for (auto& l : lits) dup = dup || l.var == v;
        if (!dup) lits.push_back({v, rng.bit() != 0});
      }
      std::sort(lits.begin(), lits.end(), [](auto& a, auto& b) { return a.var < b.var; });
      ts.emplace_back(lits);
    }
    fam.emplace_back(ts, k);
  }
  return fam;
}

}  // namespace

TEST_CASE("algorithm A, uniform restriction") {
  Rng rng(3);
  DnfFamily fam{random_kdnf(8, 3, 4, rng), random_kdnf(8, 3, 4, rng)};
  std::vector<Assignment> all;
  for (std::uint32_t v = 0; v < 8; ++v) all.push_back({VarId{v}, rng.bit() != 0});
  auto run = run_algorithm_A(fam, Restriction(all), bits(0, 6), bits(0, 4), 1);
  CHECK(run.path.empty());
  CHECK(run.tree().is_leaf());

  // One deep DNF with every variable starred: pi grows in blocks of ell+1.
  Dnf chain({Term({{VarId{0}, true}, {VarId{1}, true}, {VarId{2}, true}, {VarId{3}, true}, {VarId{4}, true},
                   {VarId{5}, true}})});
  for (int ell : {0, 1, 2}) {
    auto r = run_algorithm_A({chain}, Restriction(), bits(0x3f, 6 + ell), bits(0x3f, 6), ell);
    CHECK(r.path.size() % (ell + 1) == 0);
    CHECK(r.path.size() == 6);
    for (const auto& b : r.blocks) CHECK(static_cast<int>(b.size()) == ell + 1);
    CHECK(r.tree().depth() == 6);
  }
  CHECK_THROWS_AS(run_algorithm_A({chain}, Restriction(), {}, {}, -1), PreconditionError);
}

TEST_CASE("algorithm A reaches a deep CCDT for some x and y") {
  Rng rng(2024);
  std::vector<VarId> vars;
  for (std::uint32_t v = 0; v < 8; ++v) vars.push_back(VarId{v});
  int witnessed = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int ell = 1 + trial % 2;
    DnfFamily fam;
    for (int s = 0; s < 3; ++s) fam.push_back(random_kdnf(8, 3, 3, rng));
    auto rho = sample_uniform(vars, 0.5, rng);
    const int depth = build_ccdt(fam, ell, tree_first_builder(rho)).tree.depth();
    for (int t = 2; t <= std::min(depth, 6); ++t) {
      bool found = false;
      const int xl = t + ell;
      for (std::uint32_t xm = 0; xm < (1U << xl) && !found; ++xm)
        for (std::uint32_t ym = 0; ym < (1U << t) && !found; ++ym)
          found = static_cast<int>(run_algorithm_A(fam, rho, bits(xm, xl), bits(ym, t), ell).path.size()) >= t;
      CHECK_MESSAGE(found, "trial " << trial << " t " << t);
      witnessed += 1;
    }
  }
  CHECK(witnessed > 5);
}

TEST_CASE("algorithm A~, uniform") {
  Rng rng(8);
  Dnf chain({Term({{VarId{0}, true}, {VarId{1}, true}, {VarId{2}, true}})});
  for (int i = 0; i < 20; ++i) {
    CHECK(run_algorithm_A_tilde({chain}, bits(0xff, 8), 1, 0.0, rng).path.empty());
    auto r = run_algorithm_A_tilde({chain}, bits(0xff, 8), 2, 1.0, rng);
    // p = 1: sigma is eta in full; it has length 3 only along x0 = x1 = 1.
    for (const auto& b : r.blocks) CHECK(b.size() == 3);
  }
  Transcript tr;
  run_algorithm_A_tilde({chain}, bits(0, 4), 0, 0.5, rng, &tr);
  CHECK(to_json(tr)["steps"].is_array());
}

TEST_CASE("sampler step basics") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  Rng rng(10);
  GameState st(atlas, Approach::II);
  // (0,0) lies on no path.
  VarId free_edge = atlas.grid().edge(0, 0, 0);
  auto d = st.step(free_edge, true, rng);
  CHECK_FALSE(d.star);
  CHECK(st.value(free_edge) == 1);
  CHECK_THROWS_AS(st.step(free_edge, true, rng), PreconditionError);

  // A fresh subgrid chooses the associated center with probability 1/delta.
  const auto& path = atlas.paths()[atlas.path_index(4, 0, 0, 0)];
  long chosen = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    GameState g(atlas, Approach::II);
    g.step(path.edges.front(), false, rng);
    chosen += g.chosen(4) == path.center_a ? 1 : 0;
  }
  CHECK(std::abs(chosen - n / 2.0) < 4 * std::sqrt(n * 0.25));
}

TEST_CASE("sampler structure along full adversary orders") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  auto edges = path_edges(atlas);
  Rng rng(77);
  for (Approach ap : {Approach::I, Approach::II}) {
    for (int run = 0; run < 6; ++run) {
      GameState st(atlas, ap);
      std::vector<VarId> order = edges;
      if (run % 2) std::shuffle(order.begin(), order.end(), rng);
      for (VarId e : order) {
        if (st.value(e) >= 0 || st.is_star(e)) continue;
        auto ac = associated_center(atlas, e);
        auto d = st.step(e, rng.bit() != 0, rng);
        if (d.star) {
          REQUIRE(ac.has_value());
          CHECK(st.chosen(ac->center / 2) == ac->center);  // star only if A chosen
          CHECK(static_cast<int>(d.residual.size()) <= st.residual_cap());
        }
      }
      st.check();
      for (int s = 0; s < 9; ++s) CHECK(st.chosen(s) >= 0);
      if (ap == Approach::I) {
        // Stars are exactly the edges of live paths between the chosen centers.
        std::vector<int> chosen(9);
        for (int s = 0; s < 9; ++s) chosen[s] = st.chosen(s) % 2;
        auto rho = assemble_grid_restriction(atlas, chosen, std::vector<std::int8_t>(
                                                                atlas.grid().graph().num_edges(), 0));
        for (VarId e : edges) CHECK(st.is_star(e) == (rho.new_var[e.index] >= 0));
      }
    }
  }
}

TEST_CASE("chosen-center marginals are uniform under both approaches") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  Rng rng(5);
  // First edge of every path: resolves every subgrid quickly.
  std::vector<VarId> firsts;
  for (const auto& path : atlas.paths()) firsts.push_back(path.edges.front());
  for (Approach ap : {Approach::I, Approach::II}) {
    std::vector<std::vector<long>> counts(9, std::vector<long>(2, 0));
    for (int run = 0; run < 600; ++run) {
      GameState st(atlas, ap);
      for (VarId e : firsts)
        if (st.value(e) < 0 && !st.is_star(e)) st.step(e, rng.bit() != 0, rng);
      for (int s = 0; s < 9; ++s) {
        REQUIRE(st.chosen(s) >= 0);
        ++counts[s][st.chosen(s) % 2];
      }
    }
    for (int s = 0; s < 9; ++s) CHECK(chi_square_p(counts[s]) > 0.001);
  }
}

TEST_CASE("grid algorithms A and A~") {
  GridParams p{48, 2};
  auto atlas = build_path_atlas(p);
  GridGameSetup setup{&atlas, 32};
  Rng rng(31);
  int nonempty_a = 0, nonempty_t = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto fam = path_family(atlas, 4, 2, 6, rng);
    auto rho = sample_grid_restriction(atlas, rng);
    BitStream x(5), y(4);
    for (auto& b : x) b = rng.bit();
    for (auto& b : y) b = rng.bit();
    auto ra = run_algorithm_A_grid(fam, rho, setup, x, y, 1, nullptr);
    CHECK(ra.path.size() <= 4);
    std::vector<int> vars;
    for (const auto& a : ra.path) {
      auto m = std::get<Mapped>(apply_grid_restriction(rho, a.var));
      vars.push_back(static_cast<int>(m.new_var.index));
    }
    std::sort(vars.begin(), vars.end());
    CHECK(std::adjacent_find(vars.begin(), vars.end()) == vars.end());  // one star per path
    nonempty_a += ra.path.empty() ? 0 : 1;

    TildeRecord rec;
    Transcript tr;
    auto rt = run_algorithm_A_tilde_grid(fam, setup, y, 1, Approach::II, rng, &rec, &tr);
    CHECK(rt.path.size() <= 4);
    CHECK(rec.accounting_ok);
    CHECK(rec.max_residual_per_star <= 3);
    CHECK(rt.iterations <= 4 + 2);
    nonempty_t += rt.path.empty() ? 0 : 1;
    if (trial == 0) CHECK(to_json(tr)["steps"].size() == tr.steps.size());
  }
  CHECK(nonempty_a > 0);
  CHECK(nonempty_t > 0);
}

TEST_CASE("dominance_test") {
  std::vector<int> a(10000);
  Rng rng(4);
  for (auto& v : a) v = static_cast<int>(rng.below(5));
  std::vector<int> plus(a), minus(a);
  for (auto& v : plus) ++v;
  CHECK(dominance_test(a, a, 0.001).pass);
  CHECK(dominance_test(a, plus, 0.001).pass);
  auto v = dominance_test(plus, a, 0.001);
  CHECK_FALSE(v.pass);
  CHECK(v.max_violation > v.band);
  CHECK_THROWS_AS(dominance_test(std::vector<int>(10, 0), a, 0.001), PreconditionError);
}
