#include <map>

#include "doctest.h"
#include "switchlab/canonical.hpp"
#include "switchlab/error.hpp"
#include "switchlab/generators.hpp"
#include "switchlab/treeops.hpp"

using namespace switchlab;

namespace {

GoodTreeContext full_grid_context(int n, int k) {
  TorusGrid g = build_grid(n);
  return GoodTreeContext{LiveGraph(g), constant_charge(g.graph().num_vertices(), true), k};
}

// Edges inside the box [r0, r0+size) x [c0, c0+size) of an n-torus.
std::vector<VarId> box_edges(const TorusGrid& g, int r0, int c0, int size) {
  std::vector<VarId> out;
  for (int i = r0; i < r0 + size; ++i)
    for (int j = c0; j < c0 + size; ++j)
      for (int d = 0; d < 2; ++d) out.push_back(g.edge(i, j, d));
  return out;
}

struct GridFixture {
  GridParams params{48, 2};
  PathAtlas atlas = build_path_atlas(params);
  GoodTreeContext ctx{LiveGraph(atlas.grid()), base_charge(atlas.grid()), 7};
};

}  // namespace

TEST_CASE("is_good_tree") {
  auto ctx = full_grid_context(9, 3);
  TorusGrid g = build_grid(9);
  CHECK(is_good_tree(DecisionTree::leaf(true), ctx));
  // Querying all four edges at a vertex disconnects it.
  const Vertex v = g.vertex(4, 4);
  std::vector<VarId> star = g.graph().incident(v);
  ctx.k = 10;
  DecisionTree t = exhaustive_tree(star, Label::One);
  CHECK_FALSE(is_good_tree(t, ctx));
  star.pop_back();
  t = exhaustive_tree(star, Label::One);
  CHECK(is_good_tree(t, ctx));
  ctx.k = 3;  // depth 3 is not < 3
  CHECK_FALSE(is_good_tree(t, ctx));
}

TEST_CASE("restrict_tree_partial basics") {
  auto ctx = full_grid_context(9, 6);
  TorusGrid g = build_grid(9);
  Rng rng(3);
  auto pool = box_edges(g, 2, 2, 4);
  for (int i = 0; i < 20; ++i) {
    auto t = random_good_tree(pool, ctx, 4, 0.2, rng);
    CHECK(restrict_tree_partial(t, Restriction(), ctx) == t);
  }
  // Three edges at v set to 0: the fourth is a bridge forced to 1.
  const Vertex v = g.vertex(4, 4);
  const auto& inc = g.graph().incident(v);
  Restriction beta({{inc[0], false}, {inc[1], false}, {inc[2], false}});
  REQUIRE(pushes_contradiction(ctx.graph, ctx.charge, beta));
  DecisionTree t = DecisionTree::node(inc[3], DecisionTree::leaf(false), DecisionTree::leaf(true));
  CHECK(restrict_tree_partial(t, beta, ctx) == DecisionTree::leaf(true));
  // Restriction that does not push (isolates v with charge 1).
  Restriction bad = beta.with(inc[3], false);
  CHECK_THROWS_AS(restrict_tree_partial(t, bad, ctx), PreconditionError);
  ctx.k = 1;
  CHECK_THROWS_AS(restrict_tree_partial(t, beta, ctx), PreconditionError);
}

TEST_CASE("partial survival characterization, n = 9, depth <= 5") {
  auto ctx = full_grid_context(9, 6);
  TorusGrid g = build_grid(9);
  Rng rng(17);
  auto pool = box_edges(g, 3, 3, 3);
  int checked = 0, pruned = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto t = random_good_tree(pool, ctx, 5, 0.1, rng);
    // random beta on the same box that pushes the contradiction
    Restriction beta;
    for (int tries = 0; tries < 50; ++tries) {
      std::vector<Assignment> a;
      for (VarId e : pool)
        if (rng.coin(0.25)) a.push_back({e, rng.bit() != 0});
      Restriction cand(a);
      if (pushes_contradiction(ctx.graph, ctx.charge, cand)) {
        beta = cand;
        break;
      }
    }
    auto rep = check_survival_partial(t, beta, ctx);
    CHECK_MESSAGE(rep.pass, (rep.mismatches.empty() ? "" : rep.mismatches.front()));
    pruned += static_cast<int>(rep.branches - rep.survivors);
    ++checked;
    auto r = restrict_tree_partial(t, beta, ctx);
    CHECK(r.is_proper());
  }
  CHECK(checked == 150);
  CHECK(pruned > 0);
}

TEST_CASE("restrict_tree_full trivial cases") {
  GridFixture f;
  Rng rng(2);
  auto rho = sample_grid_restriction(f.atlas, rng);
  CHECK(restrict_tree_full(DecisionTree::leaf(true), rho, f.ctx) == DecisionTree::leaf(true));
  // Only fixed edges: the tree collapses to the leaf reached by following rho.
  std::vector<VarId> fixed;
  for (std::size_t e = 0; e < rho.new_var.size() && fixed.size() < 4; e += 37)
    if (rho.new_var[e] < 0) fixed.push_back(VarId{static_cast<std::uint32_t>(e)});
  DecisionTree t = random_tree(fixed, 4, 0.0, rng);
  auto r = restrict_tree_full(t, rho, f.ctx);
  REQUIRE(r.is_leaf());
  std::vector<std::uint8_t> x(rho.values.size(), 0);
  for (std::size_t e = 0; e < x.size(); ++e) x[e] = rho.values[e] > 0 ? 1 : 0;
  CHECK(r.at(r.root()).label == t.evaluate(x));
  auto rep = check_survival_full(t, rho, f.ctx);
  CHECK(rep.pass);
  CHECK(rep.survivors == 1);
}

TEST_CASE("full survival on random good trees, delta = 2") {
  GridFixture f;
  Rng rng(99);
  int trials = 0, pruned = 0;
  for (int r = 0; r < 25; ++r) {
    auto rho = sample_grid_restriction(f.atlas, rng);
    for (int s = 0; s < 9 && trials < 200; s += 4) {
      auto pool = live_edge_pool(f.atlas, rho, s, 1);
      for (int i = 0; i < 2; ++i) {
        auto t = random_good_tree(pool, f.ctx, 6, 0.05, rng);
        auto rep = check_survival_full(t, rho, f.ctx);
        CHECK_MESSAGE(rep.pass, (rep.mismatches.empty() ? "" : rep.mismatches.front()));
        pruned += static_cast<int>(rep.branches - rep.survivors);
        auto out = restrict_tree_full(t, rho, f.ctx);
        CHECK(out.is_proper());
        CHECK(is_good_tree(out, projected_context(rho, 7)));
        ++trials;
      }
    }
  }
  CHECK(trials >= 100);
  CHECK(pruned > 0);
}

TEST_CASE("skipping bridge pruning breaks the survival characterization") {
  GridFixture f;
  Rng rng(5);
  bool failed = false;
  for (int r = 0; r < 40 && !failed; ++r) {
    auto rho = sample_grid_restriction(f.atlas, rng);
    auto pool = live_edge_pool(f.atlas, rho, 4, 0);
    auto t = random_good_tree(pool, f.ctx, 6, 0.0, rng);
    auto rep = check_survival_full(t, rho, f.ctx, FullRestrictOptions{false});
    failed = !rep.pass;
    CHECK(check_survival_full(t, rho, f.ctx).pass);
  }
  CHECK(failed);
}

TEST_CASE("map_branch_back") {
  GridFixture f;
  Rng rng(12);
  int mapped = 0;
  for (int r = 0; r < 10; ++r) {
    auto rho = sample_grid_restriction(f.atlas, rng);
    auto pool = live_edge_pool(f.atlas, rho, r % 9, 1);
    auto t = random_good_tree(pool, f.ctx, 5, 0.1, rng);
    auto restricted = restrict_tree_full(t, rho, f.ctx);
    std::map<Branch, int> image;
    for (const auto& pb : branches(restricted)) {
      Branch b = map_branch_back(t, rho, f.ctx, pb);
      CHECK(b.leaf == pb.leaf);
      CHECK(++image[b] == 1);  // distinct branches map to distinct branches
      ++mapped;
    }
  }
  CHECK(mapped > 10);
  // A leaf T|rho maps back to the unique rho-consistent branch.
  auto rho = sample_grid_restriction(f.atlas, rng);
  std::vector<VarId> fixed;
  for (std::size_t e = 0; fixed.size() < 3; e += 11)
    if (rho.new_var[e] < 0) fixed.push_back(VarId{static_cast<std::uint32_t>(e)});
  auto t = exhaustive_tree(fixed, Label::One);
  Branch empty{{}, Label::One};
  Branch b = map_branch_back(t, rho, f.ctx, empty);
  CHECK(b.length() == 3);
  for (const auto& s : b.steps) CHECK(s.value == (rho.values[s.var.index] == 1));
  CHECK_THROWS_AS(map_branch_back(t, rho, f.ctx, Branch{{}, Label::Zero}), PreconditionError);
}

TEST_CASE("consistency predicates") {
  auto ctx = full_grid_context(9, 6);
  TorusGrid g = build_grid(9);
  Rng rng(44);
  auto pool = box_edges(g, 1, 1, 4);
  for (int i = 0; i < 30; ++i) {
    auto t = random_good_tree(pool, ctx, 4, 0.2, rng);
    CHECK(check_consistent(t, t, ctx));
    CHECK(check_neg_consistent(t, complement_tree(t), ctx));
    if (t.has_leaf(Label::Zero) && t.has_leaf(Label::One)) CHECK_FALSE(check_consistent(t, complement_tree(t), ctx));
  }
  // The CDT of a 2-DNF represents its term trees.
  std::vector<VarId> vars(pool.begin(), pool.begin() + 10);
  for (int i = 0; i < 30; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < 3; ++j) {
      auto a = vars[rng.below(vars.size())];
      auto b = vars[rng.below(vars.size())];
      if (a == b) continue;
      if (b < a) std::swap(a, b);
      terms.emplace_back(std::vector<Literal>{{a, rng.bit() != 0}, {b, rng.bit() != 0}});
    }
    Dnf f(terms, 2);
    auto cdt = build_cdt(f);
    if (!is_good_tree(cdt, ctx)) continue;
    std::vector<DecisionTree> parts;
    for (const auto& t : f.terms()) parts.push_back(term_tree(t));
    CHECK(check_represents(cdt, parts, ctx));
  }
}
