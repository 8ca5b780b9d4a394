#include "switchlab/generators.hpp"

#include <algorithm>
#include <functional>

#include "switchlab/error.hpp"

namespace switchlab {

Dnf random_kdnf(int num_vars, int k, int num_terms, Rng& rng) {
  if (k < 1 || k > num_vars || num_terms < 0) throw PreconditionError("random_kdnf: bad parameters");
  std::vector<std::uint32_t> ids(num_vars);
  for (int i = 0; i < num_vars; ++i) ids[i] = static_cast<std::uint32_t>(i);
  std::vector<Term> terms;
  terms.reserve(num_terms);
  for (int t = 0; t < num_terms; ++t) {
    // partial Fisher-Yates
    for (int i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.below(num_vars - i)]);
    std::vector<Literal> lits;
    for (int i = 0; i < k; ++i) lits.push_back({VarId{ids[i]}, rng.bit() != 0});
    std::sort(lits.begin(), lits.end(), [](const Literal& a, const Literal& b) { return a.var < b.var; });
    terms.emplace_back(std::move(lits));
  }
  return Dnf(std::move(terms), k);
}

namespace {

DecisionTree grow(const std::vector<VarId>& pool, int max_depth, double stop, Rng& rng,
                  const std::function<bool(const std::vector<VarId>&, VarId)>& allowed) {
  DecisionTree::Builder b;
  std::vector<VarId> path;
  std::function<std::int32_t(int)> rec = [&](int depth) -> std::int32_t {
    if (depth == max_depth || (depth > 0 && rng.coin(stop))) return b.leaf(label_of(rng.bit() != 0));
    std::vector<VarId> options;
    for (VarId v : pool) {
      if (std::find(path.begin(), path.end(), v) == path.end() && allowed(path, v)) options.push_back(v);
    }
    if (options.empty()) return b.leaf(label_of(rng.bit() != 0));
    const VarId v = options[rng.below(options.size())];
    path.push_back(v);
    std::int32_t c0 = rec(depth + 1);
    std::int32_t c1 = rec(depth + 1);
    path.pop_back();
    return b.node(v, c0, c1);
  };
  std::int32_t root = rec(0);
  return std::move(b).finish(root);
}

}  // namespace

DecisionTree random_tree(const std::vector<VarId>& pool, int max_depth, double stop, Rng& rng) {
  return grow(pool, max_depth, stop, rng, [](const std::vector<VarId>&, VarId) { return true; });
}

DecisionTree random_good_tree(const std::vector<VarId>& pool, const GoodTreeContext& ctx, int max_depth, double stop,
                              Rng& rng) {
  const int d = std::min(max_depth, ctx.k - 1);
  return grow(pool, d, stop, rng, [&](const std::vector<VarId>& path, VarId v) {
    std::vector<VarId> s = path;
    s.push_back(v);
    return is_independent(ctx.graph, s);
  });
}

std::vector<VarId> live_edge_pool(const PathAtlas& atlas, const GridRestriction& rho, int subgrid, int fixed_extra) {
  std::vector<VarId> pool;
  const int c = rho.chosen_center(subgrid);
  for (int pi : rho.live_path) {
    const auto& p = atlas.paths()[pi];
    if (p.center_a != c && p.center_b != c) continue;
    pool.insert(pool.end(), p.edges.begin(), p.edges.end());
    // a fixed edge hanging off the path start
    for (int x = 0; x < fixed_extra; ++x) {
      const auto& g = atlas.grid().graph();
      const Vertex v = p.vertices[std::min<std::size_t>(x + 1, p.vertices.size() - 1)];
      for (VarId e : g.incident(v)) {
        if (rho.new_var[e.index] < 0) {
          pool.push_back(e);
          break;
        }
      }
    }
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

}  // namespace switchlab
