#include "switchlab/canonical.hpp"

#include <algorithm>
#include <functional>

#include "switchlab/error.hpp"

namespace switchlab {

DecisionTree build_cdt(const Dnf& f) {
  const auto& terms = f.terms();
  DecisionTree::Builder b;
  std::function<std::int32_t(std::size_t, const Restriction&)> cdt;
  std::function<std::int32_t(const std::vector<Literal>&, std::size_t, std::size_t, const Restriction&)> chain;
  cdt = [&](std::size_t i, const Restriction& pi) -> std::int32_t {
    for (; i < terms.size(); ++i) {
      auto r = restrict_term(terms[i], pi);
      if (auto* c = std::get_if<Constant>(&r)) {
        if (*c == Constant::Zero) continue;
        return b.leaf(Label::One);
      }
      return chain(std::get<Term>(r).literals(), 0, i, pi);
    }
    return b.leaf(Label::Zero);
  };
  chain = [&](const std::vector<Literal>& lits, std::size_t p, std::size_t i, const Restriction& pi) -> std::int32_t {
    if (p == lits.size()) return b.leaf(Label::One);
    const Literal& lit = lits[p];
    std::int32_t falsified = cdt(i + 1, pi.with(lit.var, !lit.positive));
    std::int32_t satisfied = chain(lits, p + 1, i, pi.with(lit.var, lit.positive));
    return lit.positive ? b.node(lit.var, falsified, satisfied) : b.node(lit.var, satisfied, falsified);
  };
  std::int32_t root = cdt(0, Restriction());
  return std::move(b).finish(root);
}

DecisionTree build_cdt(const std::variant<Dnf, Constant>& f) {
  if (const auto* c = std::get_if<Constant>(&f)) return DecisionTree::leaf(*c == Constant::One);
  return build_cdt(std::get<Dnf>(f));
}

DecisionTree build_cdt_independent(const Dnf& f, const GoodTreeContext& ctx, const Restriction& pi) {
  const auto& terms = f.terms();
  DecisionTree::Builder b;
  std::function<std::int32_t(std::size_t, const Restriction&)> cdt;
  std::function<std::int32_t(const DecisionTree&, std::int32_t, std::size_t, const Restriction&)> attach;
  cdt = [&](std::size_t i, const Restriction& sigma) -> std::int32_t {
    for (; i < terms.size(); ++i) {
      DecisionTree r = restrict_tree_partial(term_tree(terms[i]), sigma, ctx);
      if (!r.has_leaf(Label::One)) continue;
      return attach(r, r.root(), i, sigma);
    }
    return b.leaf(Label::Zero);
  };
  attach = [&](const DecisionTree& r, std::int32_t id, std::size_t i, const Restriction& sigma) -> std::int32_t {
    const auto& n = r.at(id);
    if (n.is_leaf()) return n.label == Label::One ? b.leaf(Label::One) : cdt(i + 1, sigma);
    std::int32_t c0 = attach(r, n.child[0], i, sigma.with(n.var, false));
    std::int32_t c1 = attach(r, n.child[1], i, sigma.with(n.var, true));
    return b.node(n.var, c0, c1);
  };
  std::int32_t root = cdt(0, pi);
  return std::move(b).finish(root);
}

CcdtBuilder plain_builder() {
  return {[](const Dnf& f, const Restriction& pi) { return build_cdt(restrict_dnf(f, pi)); },
          [](const DecisionTree& block, const Restriction&) { return block; }};
}

CcdtBuilder tree_first_builder(const Restriction& rho) {
  return {[rho](const Dnf& f, const Restriction& pi) {
            return restrict_tree_simple(build_cdt(restrict_dnf(f, pi)), rho);
          },
          [](const DecisionTree& block, const Restriction&) { return block; }};
}

CcdtBuilder independent_builder(const GoodTreeContext& ctx) {
  return {[ctx](const Dnf& f, const Restriction& pi) { return build_cdt_independent(f, ctx, pi); },
          [ctx](const DecisionTree& block, const Restriction& pi) { return restrict_tree_partial(block, pi, ctx); }};
}

std::vector<Assignment> leftmost_path(const DecisionTree& tree, int length) {
  std::vector<Assignment> path;
  std::function<bool(std::int32_t)> rec = [&](std::int32_t id) -> bool {
    if (static_cast<int>(path.size()) == length) return true;
    const auto& n = tree.at(id);
    if (n.is_leaf()) return false;
    for (int b = 0; b < 2; ++b) {
      path.push_back({n.var, b == 1});
      if (rec(n.child[b])) return true;
      path.pop_back();
    }
    return false;
  };
  if (!rec(tree.root())) throw PreconditionError("tree has no path of the requested length");
  return path;
}

bool follows(const DecisionTree& tree, const std::vector<Assignment>& path) {
  std::int32_t id = tree.root();
  for (const auto& step : path) {
    const auto& n = tree.at(id);
    if (n.is_leaf() || n.var != step.var) return false;
    id = n.child[step.value ? 1 : 0];
  }
  return true;
}

Ccdt build_ccdt(const DnfFamily& family, int ell, const CcdtBuilder& builder, int max_depth) {
  if (ell < 0) throw PreconditionError("ell must be non-negative");
  DecisionTree::Builder b;
  std::vector<int> origin;
  auto record = [&](std::int32_t id, int who) {
    if (static_cast<std::size_t>(id) >= origin.size()) origin.resize(id + 1, -1);
    origin[id] = who;
  };
  std::function<std::int32_t(const Restriction&, int)> build;
  std::function<std::int32_t(const DecisionTree&, std::int32_t, const Restriction&, int, int)> graft;
  build = [&](const Restriction& pi, int depth) -> std::int32_t {
    if (depth > max_depth) throw PreconditionError("CCDT exceeds the recursion depth cap");
    for (std::size_t j = 0; j < family.size(); ++j) {
      DecisionTree t = builder.member_tree(family[j], pi);
      if (t.depth() <= ell) continue;
      std::vector<VarId> eta;
      for (const auto& a : leftmost_path(t, ell + 1)) eta.push_back(a.var);
      DecisionTree block = builder.block_tree(exhaustive_tree(eta), pi);
      return graft(block, block.root(), pi, static_cast<int>(j), depth);
    }
    std::int32_t id = b.leaf(Label::None);
    record(id, -1);
    return id;
  };
  graft = [&](const DecisionTree& block, std::int32_t id, const Restriction& pi, int who, int depth) -> std::int32_t {
    const auto& n = block.at(id);
    if (n.is_leaf()) return build(pi, depth);
    std::int32_t c0 = graft(block, n.child[0], pi.with(n.var, false), who, depth + 1);
    std::int32_t c1 = graft(block, n.child[1], pi.with(n.var, true), who, depth + 1);
    std::int32_t out = b.node(n.var, c0, c1);
    record(out, who);
    return out;
  };
  std::int32_t root = build(Restriction(), 0);
  Ccdt out;
  origin.resize(static_cast<std::size_t>(root) + 1, -1);
  out.tree = std::move(b).finish(root);
  out.origin = std::move(origin);
  return out;
}

DnfFamily restrict_family(const DnfFamily& family, const Restriction& rho) {
  DnfFamily out;
  out.reserve(family.size());
  for (const auto& f : family) {
    auto r = restrict_dnf(f, rho);
    if (auto* c = std::get_if<Constant>(&r)) {
      // Constant one as a single empty term; its CDT is the 1-leaf.
      out.push_back(*c == Constant::One ? Dnf({Term()}, f.width_bound()) : Dnf({}, f.width_bound()));
    } else {
      out.push_back(std::get<Dnf>(std::move(r)));
    }
  }
  return out;
}

Dnf project_dnf(const Dnf& f, const GridRestriction& rho) {
  std::vector<Term> kept;
  for (const auto& t : f.terms()) {
    std::vector<Literal> lits;
    bool dead = false;
    for (const auto& lit : t.literals()) {
      auto img = apply_grid_restriction(rho, lit.var);
      if (const auto* fx = std::get_if<Fixed>(&img)) {
        if (fx->value != lit.positive) dead = true;
        continue;
      }
      const auto& m = std::get<Mapped>(img);
      const Literal nl{m.new_var, lit.positive != m.negated};
      auto it = std::find_if(lits.begin(), lits.end(), [&](const Literal& l) { return l.var == nl.var; });
      if (it == lits.end()) {
        lits.push_back(nl);
      } else if (it->positive != nl.positive) {
        dead = true;
      }
    }
    if (dead) continue;
    if (lits.empty()) return Dnf({Term()}, f.width_bound());
    kept.emplace_back(std::move(lits));
  }
  return Dnf(std::move(kept), f.width_bound());
}

DnfFamily project_family(const DnfFamily& family, const GridRestriction& rho) {
  DnfFamily out;
  out.reserve(family.size());
  for (const auto& f : family) out.push_back(project_dnf(f, rho));
  return out;
}

int ccdt_depth_uniform(const DnfFamily& family, int ell, const Restriction& rho) {
  return build_ccdt(restrict_family(family, rho), ell, plain_builder()).tree.depth();
}

int ccdt_depth_grid(const DnfFamily& family, int ell, const GridRestriction& rho, int k) {
  return build_ccdt(project_family(family, rho), ell, independent_builder(projected_context(rho, k))).tree.depth();
}

Responsibility responsible_subfamily(const DnfFamily& family, int ell, const CcdtBuilder& builder,
                                     const std::vector<Assignment>& path) {
  Ccdt c = build_ccdt(family, ell, builder);
  Responsibility out;
  std::int32_t id = c.tree.root();
  for (const auto& step : path) {
    const auto& n = c.tree.at(id);
    if (n.is_leaf() || n.var != step.var) throw PreconditionError("responsible_subfamily: path is not in the CCDT");
    const int who = c.origin.at(id);
    if (std::find(out.members.begin(), out.members.end(), who) == out.members.end()) out.members.push_back(who);
    id = n.child[step.value ? 1 : 0];
  }
  std::vector<int> sorted = out.members;
  std::sort(sorted.begin(), sorted.end());
  DnfFamily sub;
  for (int j : sorted) sub.push_back(family[j]);
  out.reproduced = follows(build_ccdt(sub, ell, builder).tree, path);
  return out;
}

}  // namespace switchlab
