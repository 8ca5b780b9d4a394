#include "switchlab/treeops.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>

#include "switchlab/error.hpp"

namespace switchlab {

namespace {

std::vector<VarId> support(const std::vector<Assignment>& steps) {
  std::vector<VarId> out;
  out.reserve(steps.size());
  for (const auto& a : steps) out.push_back(a.var);
  return out;
}

std::string describe(const Branch& br) {
  std::ostringstream os;
  os << to_string(br.as_restriction()) << " -> " << static_cast<int>(br.leaf);
  return os.str();
}

// Pruning rule of the full procedure on the projected grid.
class Projector {
 public:
  Projector(const GridRestriction& rho, FullRestrictOptions options)
      : rho_(rho), gm_(rho.new_grid), alpha_(rho.new_charge), options_(options) {}

  // Value a bridge must take; nullopt when P is not a bridge of G_m - state
  // (or pruning is disabled).
  std::optional<bool> forced(const Restriction& state, VarId p) const {
    if (!options_.prune_bridges) return std::nullopt;
    auto br = bridges(gm_.without(state));
    if (!std::binary_search(br.begin(), br.end(), p)) return std::nullopt;
    for (int b = 0; b < 2; ++b) {
      if (pushes_contradiction(gm_, alpha_, state.with(p, b == 1))) return b == 1;
    }
    throw InvariantViolation("restrict_tree_full: no value of bridge " + std::to_string(p.index) + " under " +
                             to_string(state) + " pushes the contradiction");
  }

  const GridRestriction& rho() const { return rho_; }
  const LiveGraph& gm() const { return gm_; }
  const Charge& alpha() const { return alpha_; }

 private:
  const GridRestriction& rho_;
  LiveGraph gm_;
  Charge alpha_;
  FullRestrictOptions options_;
};

void require_good(const DecisionTree& tree, const GoodTreeContext& ctx, const char* who) {
  if (!is_good_tree(tree, ctx)) throw PreconditionError(std::string(who) + ": tree is not good in its context");
}

// Does the full procedure, run along branch br, reach br's leaf?
bool survives_full(const DecisionTree& tree, const Branch& br, const Projector& proj) {
  Restriction state;
  std::int32_t id = tree.root();
  for (const auto& step : br.steps) {
    const auto& n = tree.at(id);
    if (n.is_leaf() || n.var != step.var) throw InvariantViolation("branch does not follow the tree");
    auto img = apply_grid_restriction(proj.rho(), step.var);
    if (const auto* f = std::get_if<Fixed>(&img)) {
      if (f->value != step.value) return false;
    } else {
      const auto& m = std::get<Mapped>(img);
      const bool pv = step.value != m.negated;
      if (auto cur = state.get(m.new_var)) {
        if (*cur != pv) return false;
      } else {
        if (auto b = proj.forced(state, m.new_var); b && *b != pv) return false;
        state = state.with(m.new_var, pv);
      }
    }
    id = n.child[step.value ? 1 : 0];
  }
  return true;
}

// Decomposition characterisation for the full procedure.
bool decomposes(const Branch& br, const Projector& proj) {
  std::vector<Assignment> mapped;
  for (const auto& step : br.steps) {
    auto img = apply_grid_restriction(proj.rho(), step.var);
    if (const auto* f = std::get_if<Fixed>(&img)) {
      if (f->value != step.value) return false;
    } else {
      const auto& m = std::get<Mapped>(img);
      mapped.push_back({m.new_var, step.value != m.negated});
    }
  }
  Restriction beta;
  try {
    beta = Restriction(std::move(mapped));
  } catch (const PreconditionError&) {
    return false;  // inconsistent values for one new variable
  }
  return pushes_contradiction(proj.gm(), proj.alpha(), beta);
}

bool survives_partial(const DecisionTree& tree, const Branch& br, const Restriction& beta, const GoodTreeContext& ctx) {
  Restriction gamma = beta;
  std::int32_t id = tree.root();
  for (const auto& step : br.steps) {
    const auto& n = tree.at(id);
    Restriction closed = extend_by_bridges(ctx.graph, ctx.charge, gamma);
    if (auto v = closed.get(n.var)) {
      if (*v != step.value) return false;
      gamma = closed;
    } else {
      gamma = closed.with(n.var, step.value);
    }
    id = n.child[step.value ? 1 : 0];
  }
  return true;
}

// "T|pi = b": every leaf of the partial restriction is b.
bool restricted_is(const DecisionTree& tree, const Restriction& pi, Label b, const GoodTreeContext& ctx) {
  return restrict_tree_partial(tree, pi, ctx).all_leaves(b);
}

Label flip(Label l) { return l == Label::One ? Label::Zero : l == Label::Zero ? Label::One : Label::None; }

}  // namespace

bool is_good_tree(const DecisionTree& tree, const GoodTreeContext& ctx) {
  if (tree.depth() >= ctx.k) return false;
  for (const auto& br : branches(tree)) {
    if (!is_independent(ctx.graph, support(br.steps))) return false;
  }
  return true;
}

GoodTreeContext projected_context(const GridRestriction& rho, int k) {
  return GoodTreeContext{LiveGraph(rho.new_grid), rho.new_charge, k};
}

DecisionTree restrict_tree_full(const DecisionTree& tree, const GridRestriction& rho, const GoodTreeContext& ctx,
                                FullRestrictOptions options) {
  require_good(tree, ctx, "restrict_tree_full");
  Projector proj(rho, options);
  DecisionTree::Builder b;
  std::function<std::int32_t(std::int32_t, const Restriction&)> rec = [&](std::int32_t id,
                                                                          const Restriction& state) -> std::int32_t {
    const auto& n = tree.at(id);
    if (n.is_leaf()) return b.leaf(n.label);
    auto img = apply_grid_restriction(rho, n.var);
    if (const auto* f = std::get_if<Fixed>(&img)) return rec(n.child[f->value ? 1 : 0], state);
    const auto& m = std::get<Mapped>(img);
    // child for new-variable value v is child[v xor negated]
    auto child = [&](bool v) { return n.child[(v != m.negated) ? 1 : 0]; };
    if (auto cur = state.get(m.new_var)) return rec(child(*cur), state);
    if (auto forced = proj.forced(state, m.new_var)) return rec(child(*forced), state.with(m.new_var, *forced));
    std::int32_t c0 = rec(child(false), state.with(m.new_var, false));
    std::int32_t c1 = rec(child(true), state.with(m.new_var, true));
    return b.node(m.new_var, c0, c1);
  };
  std::int32_t root = rec(tree.root(), Restriction());
  return std::move(b).finish(root);
}

DecisionTree restrict_tree_partial(const DecisionTree& tree, const Restriction& beta, const GoodTreeContext& ctx) {
  if (tree.depth() >= ctx.k) throw PreconditionError("restrict_tree_partial: tree depth exceeds the context bound");
  if (!pushes_contradiction(ctx.graph, ctx.charge, beta)) {
    throw PreconditionError("restrict_tree_partial: restriction does not push the contradiction");
  }
  DecisionTree::Builder b;
  std::function<std::int32_t(std::int32_t, const Restriction&)> rec = [&](std::int32_t id,
                                                                          const Restriction& gamma) -> std::int32_t {
    const auto& n = tree.at(id);
    if (n.is_leaf()) return b.leaf(n.label);
    Restriction closed = extend_by_bridges(ctx.graph, ctx.charge, gamma);
    if (auto v = closed.get(n.var)) return rec(n.child[*v ? 1 : 0], closed);
    std::int32_t c0 = rec(n.child[0], closed.with(n.var, false));
    std::int32_t c1 = rec(n.child[1], closed.with(n.var, true));
    return b.node(n.var, c0, c1);
  };
  std::int32_t root = rec(tree.root(), beta);
  return std::move(b).finish(root);
}

SurvivalReport check_survival_full(const DecisionTree& tree, const GridRestriction& rho, const GoodTreeContext& ctx,
                                   FullRestrictOptions options) {
  require_good(tree, ctx, "check_survival_full");
  Projector proj(rho, options);
  SurvivalReport rep;
  for (const auto& br : branches(tree)) {
    ++rep.branches;
    const bool s = survives_full(tree, br, proj);
    const bool d = decomposes(br, proj);
    rep.survivors += s ? 1 : 0;
    if (s != d) {
      rep.pass = false;
      rep.mismatches.push_back(describe(br) + (s ? ": survives without decomposing" : ": decomposes but is pruned"));
    }
  }
  return rep;
}

SurvivalReport check_survival_partial(const DecisionTree& tree, const Restriction& beta, const GoodTreeContext& ctx) {
  SurvivalReport rep;
  for (const auto& br : branches(tree)) {
    ++rep.branches;
    const bool s = survives_partial(tree, br, beta, ctx);
    const Restriction pi = br.as_restriction();
    const bool c = pi.compatible(beta) && pushes_contradiction(ctx.graph, ctx.charge, beta.compose(pi));
    rep.survivors += s ? 1 : 0;
    if (s != c) {
      rep.pass = false;
      rep.mismatches.push_back(describe(br) + (s ? ": survives but does not push" : ": pushes but is pruned"));
    }
  }
  // Every branch of the restricted tree pushes the contradiction.
  for (const auto& br : branches(restrict_tree_partial(tree, beta, ctx))) {
    if (!pushes_contradiction(ctx.graph, ctx.charge, beta.compose(br.as_restriction()))) {
      rep.pass = false;
      rep.mismatches.push_back(describe(br) + ": restricted branch does not push the contradiction");
    }
  }
  return rep;
}

Restriction lift_projected(const GridRestriction& rho, const Restriction& projected_closure) {
  std::vector<Assignment> out;
  for (std::size_t e = 0; e < rho.new_var.size(); ++e) {
    const VarId edge{static_cast<std::uint32_t>(e)};
    if (rho.new_var[e] < 0) {
      out.push_back({edge, rho.values[e] != 0});
    } else if (auto v = projected_closure.get(VarId{static_cast<std::uint32_t>(rho.new_var[e])})) {
      out.push_back({edge, *v != (rho.negated[e] != 0)});
    }
  }
  return Restriction(std::move(out));
}

Branch map_branch_back(const DecisionTree& tree, const GridRestriction& rho, const GoodTreeContext& ctx,
                       const Branch& projected) {
  DecisionTree restricted = restrict_tree_full(tree, rho, ctx);
  auto rb = branches(restricted);
  if (std::find(rb.begin(), rb.end(), projected) == rb.end()) {
    throw PreconditionError("map_branch_back: branch is not in the restricted tree");
  }
  GoodTreeContext pctx = projected_context(rho, ctx.k);
  Restriction cl = closure_restriction(pctx.graph, pctx.charge, projected.as_restriction());
  Restriction lifted = lift_projected(rho, cl);
  std::vector<Branch> found;
  for (auto& br : branches(tree)) {
    if (br.leaf == projected.leaf && br.as_restriction().is_sub_restriction_of(lifted)) found.push_back(std::move(br));
  }
  if (found.size() != 1) {
    throw InvariantViolation("map_branch_back: " + std::to_string(found.size()) + " branches of T match " +
                             describe(projected));
  }
  return found.front();
}

bool check_consistent(const DecisionTree& t1, const DecisionTree& t2, const GoodTreeContext& ctx) {
  for (const auto& br : branches(t1)) {
    if (!restricted_is(t2, br.as_restriction(), br.leaf, ctx)) return false;
  }
  for (const auto& br : branches(t2)) {
    if (!restricted_is(t1, br.as_restriction(), br.leaf, ctx)) return false;
  }
  return true;
}

bool check_neg_consistent(const DecisionTree& t1, const DecisionTree& t2, const GoodTreeContext& ctx) {
  for (const auto& br : branches(t1)) {
    if (!restricted_is(t2, br.as_restriction(), flip(br.leaf), ctx)) return false;
  }
  for (const auto& br : branches(t2)) {
    if (!restricted_is(t1, br.as_restriction(), flip(br.leaf), ctx)) return false;
  }
  return true;
}

bool check_represents(const DecisionTree& tree, const std::vector<DecisionTree>& parts, const GoodTreeContext& ctx) {
  for (const auto& br : branches(tree)) {
    const Restriction pi = br.as_restriction();
    if (br.leaf == Label::Zero) {
      for (const auto& t : parts) {
        if (!restricted_is(t, pi, Label::Zero, ctx)) return false;
      }
    } else if (br.leaf == Label::One) {
      bool any = false;
      for (const auto& t : parts) any = any || restricted_is(t, pi, Label::One, ctx);
      if (!any) return false;
    }
  }
  return true;
}

}  // namespace switchlab
