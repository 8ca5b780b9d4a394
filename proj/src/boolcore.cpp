#include "switchlab/boolcore.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "switchlab/error.hpp"

namespace switchlab {

Term::Term(std::vector<Literal> literals) : lits_(std::move(literals)) {
  std::sort(lits_.begin(), lits_.end(),
            [](const Literal& a, const Literal& b) { return a.var < b.var; });
  for (std::size_t i = 1; i < lits_.size(); ++i) {
    if (lits_[i].var == lits_[i - 1].var) {
      throw PreconditionError("term repeats variable " + std::to_string(lits_[i].var.index));
    }
  }
}

Dnf::Dnf(std::vector<Term> terms, int width_bound) : terms_(std::move(terms)), k_(width_bound) {
  int widest = 0;
  for (const auto& t : terms_) widest = std::max(widest, static_cast<int>(t.width()));
  if (k_ < 0) k_ = widest;
  if (widest > k_) throw PreconditionError("term wider than the DNF width bound");
}

Restriction::Restriction(std::vector<Assignment> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  std::vector<Assignment> out;
  out.reserve(entries_.size());
  for (const auto& a : entries_) {
    if (!out.empty() && out.back().var == a.var) {
      if (out.back().value != a.value) {
        throw PreconditionError("conflicting values for variable " + std::to_string(a.var.index));
      }
      continue;
    }
    out.push_back(a);
  }
  entries_ = std::move(out);
}

std::optional<bool> Restriction::get(VarId v) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const Assignment& a, VarId x) { return a.var < x; });
  if (it == entries_.end() || it->var != v) return std::nullopt;
  return it->value;
}

Restriction Restriction::with(VarId v, bool value) const {
  Restriction r;
  r.entries_.reserve(entries_.size() + 1);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const Assignment& a, VarId x) { return a.var < x; });
  if (it != entries_.end() && it->var == v) {
    if (it->value != value) {
      throw PreconditionError("conflicting values for variable " + std::to_string(v.index));
    }
    return *this;
  }
  r.entries_.insert(r.entries_.end(), entries_.begin(), it);
  r.entries_.push_back({v, value});
  r.entries_.insert(r.entries_.end(), it, entries_.end());
  return r;
}

bool Restriction::compatible(const Restriction& other) const {
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->var < b->var) {
      ++a;
    } else if (b->var < a->var) {
      ++b;
    } else {
      if (a->value != b->value) return false;
      ++a;
      ++b;
    }
  }
  return true;
}

bool Restriction::is_sub_restriction_of(const Restriction& other) const {
  for (const auto& a : entries_) {
    auto v = other.get(a.var);
    if (!v || *v != a.value) return false;
  }
  return true;
}

Restriction Restriction::compose(const Restriction& other) const {
  if (!compatible(other)) throw PreconditionError("composing incompatible restrictions");
  std::vector<Assignment> merged;
  merged.reserve(entries_.size() + other.entries_.size());
  std::set_union(entries_.begin(), entries_.end(), other.entries_.begin(), other.entries_.end(),
                 std::back_inserter(merged),
                 [](const Assignment& x, const Assignment& y) { return x.var < y.var; });
  Restriction r;
  r.entries_ = std::move(merged);
  return r;
}

std::variant<Term, Constant> restrict_term(const Term& t, const Restriction& beta) {
  std::vector<Literal> kept;
  for (const auto& lit : t.literals()) {
    auto v = beta.get(lit.var);
    if (!v) {
      kept.push_back(lit);
    } else if (*v != lit.positive) {
      return Constant::Zero;
    }
  }
  if (kept.empty()) return Constant::One;
  return Term(std::move(kept));
}

std::variant<Dnf, Constant> restrict_dnf(const Dnf& f, const Restriction& beta) {
  std::vector<Term> kept;
  for (const auto& t : f.terms()) {
    auto r = restrict_term(t, beta);
    if (auto* c = std::get_if<Constant>(&r)) {
      if (*c == Constant::One) return Constant::One;
      continue;
    }
    kept.push_back(std::get<Term>(std::move(r)));
  }
  return Dnf(std::move(kept), f.width_bound());
}

bool evaluate(const Term& t, const std::vector<std::uint8_t>& x) {
  for (const auto& lit : t.literals()) {
    if ((x.at(lit.var.index) != 0) != lit.positive) return false;
  }
  return true;
}

bool evaluate(const Dnf& f, const std::vector<std::uint8_t>& x) {
  for (const auto& t : f.terms()) {
    if (evaluate(t, x)) return true;
  }
  return false;
}

// ---- DecisionTree ----

std::int32_t DecisionTree::Builder::leaf(Label label) {
  Node n;
  n.label = label;
  nodes_.push_back(n);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t DecisionTree::Builder::node(VarId var, std::int32_t c0, std::int32_t c1) {
  Node n;
  n.var = var;
  n.child[0] = c0;
  n.child[1] = c1;
  nodes_.push_back(n);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t DecisionTree::Builder::graft(const DecisionTree& tree, std::int32_t at) {
  const Node& n = tree.at(at);
  if (n.is_leaf()) return leaf(n.label);
  std::int32_t c0 = graft(tree, n.child[0]);
  std::int32_t c1 = graft(tree, n.child[1]);
  return node(n.var, c0, c1);
}

DecisionTree DecisionTree::Builder::finish(std::int32_t root) && {
  DecisionTree t;
  t.nodes_ = std::move(nodes_);
  t.root_ = root;
  return t;
}

DecisionTree::DecisionTree() { nodes_.push_back(Node{}); }

DecisionTree DecisionTree::leaf(Label label) {
  DecisionTree t;
  t.nodes_[0].label = label;
  return t;
}

DecisionTree DecisionTree::node(VarId var, const DecisionTree& c0, const DecisionTree& c1) {
  Builder b;
  std::int32_t a = b.graft(c0);
  std::int32_t c = b.graft(c1);
  return std::move(b).finish(b.node(var, a, c));
}

int DecisionTree::depth() const {
  std::function<int(std::int32_t)> rec = [&](std::int32_t id) -> int {
    const Node& n = at(id);
    if (n.is_leaf()) return 0;
    return 1 + std::max(rec(n.child[0]), rec(n.child[1]));
  };
  return rec(root_);
}

std::size_t DecisionTree::leaf_count() const {
  std::size_t count = 0;
  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    const Node& n = at(stack.back());
    stack.pop_back();
    if (n.is_leaf()) {
      ++count;
    } else {
      stack.push_back(n.child[0]);
      stack.push_back(n.child[1]);
    }
  }
  return count;
}

bool DecisionTree::is_proper() const {
  std::vector<VarId> path;
  std::function<bool(std::int32_t)> rec = [&](std::int32_t id) -> bool {
    const Node& n = at(id);
    if (n.is_leaf()) return true;
    if (std::find(path.begin(), path.end(), n.var) != path.end()) return false;
    path.push_back(n.var);
    bool ok = rec(n.child[0]) && rec(n.child[1]);
    path.pop_back();
    return ok;
  };
  return rec(root_);
}

bool DecisionTree::has_leaf(Label label) const {
  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    const Node& n = at(stack.back());
    stack.pop_back();
    if (n.is_leaf()) {
      if (n.label == label) return true;
    } else {
      stack.push_back(n.child[0]);
      stack.push_back(n.child[1]);
    }
  }
  return false;
}

bool DecisionTree::all_leaves(Label label) const {
  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    const Node& n = at(stack.back());
    stack.pop_back();
    if (n.is_leaf()) {
      if (n.label != label) return false;
    } else {
      stack.push_back(n.child[0]);
      stack.push_back(n.child[1]);
    }
  }
  return true;
}

Label DecisionTree::evaluate(const std::vector<std::uint8_t>& x) const {
  std::int32_t id = root_;
  while (!at(id).is_leaf()) {
    const Node& n = at(id);
    id = n.child[x.at(n.var.index) != 0 ? 1 : 0];
  }
  return at(id).label;
}

std::vector<VarId> DecisionTree::variables() const {
  std::vector<VarId> vars;
  std::vector<std::int32_t> stack{root_};
  while (!stack.empty()) {
    const Node& n = at(stack.back());
    stack.pop_back();
    if (!n.is_leaf()) {
      vars.push_back(n.var);
      stack.push_back(n.child[0]);
      stack.push_back(n.child[1]);
    }
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

bool DecisionTree::operator==(const DecisionTree& other) const {
  std::function<bool(std::int32_t, std::int32_t)> rec = [&](std::int32_t a, std::int32_t b) {
    const Node& x = at(a);
    const Node& y = other.at(b);
    if (x.is_leaf() != y.is_leaf()) return false;
    if (x.is_leaf()) return x.label == y.label;
    return x.var == y.var && rec(x.child[0], y.child[0]) && rec(x.child[1], y.child[1]);
  };
  return rec(root_, other.root_);
}

std::string DecisionTree::to_string() const {
  std::ostringstream os;
  std::function<void(std::int32_t)> rec = [&](std::int32_t id) {
    const Node& n = at(id);
    if (n.is_leaf()) {
      os << (n.label == Label::None ? "_" : n.label == Label::One ? "1" : "0");
      return;
    }
    os << "(x" << n.var.index << " ";
    rec(n.child[0]);
    os << " ";
    rec(n.child[1]);
    os << ")";
  };
  rec(root_);
  return os.str();
}

std::vector<Branch> branches(const DecisionTree& tree, BranchSelect which) {
  std::vector<Branch> out;
  std::vector<Assignment> path;
  std::function<void(std::int32_t)> rec = [&](std::int32_t id) {
    const auto& n = tree.at(id);
    if (n.is_leaf()) {
      bool keep = which == BranchSelect::Both || (which == BranchSelect::Zero && n.label == Label::Zero) ||
                  (which == BranchSelect::One && n.label == Label::One);
      if (keep) out.push_back(Branch{path, n.label});
      return;
    }
    for (int b = 0; b < 2; ++b) {
      path.push_back({n.var, b == 1});
      rec(n.child[b]);
      path.pop_back();
    }
  };
  rec(tree.root());
  return out;
}

DecisionTree restrict_tree_simple(const DecisionTree& tree, const Restriction& beta) {
  DecisionTree::Builder b;
  std::function<std::int32_t(std::int32_t)> rec = [&](std::int32_t id) -> std::int32_t {
    const auto& n = tree.at(id);
    if (n.is_leaf()) return b.leaf(n.label);
    if (auto v = beta.get(n.var)) return rec(n.child[*v ? 1 : 0]);
    std::int32_t c0 = rec(n.child[0]);
    std::int32_t c1 = rec(n.child[1]);
    return b.node(n.var, c0, c1);
  };
  std::int32_t root = rec(tree.root());
  return std::move(b).finish(root);
}

bool is_k_clipped(const DecisionTree& tree, int k) {
  if (k < 0) throw PreconditionError("k must be non-negative");
  bool ok = true;
  // Returns the distance to the nearest leaf below id.
  std::function<int(std::int32_t)> rec = [&](std::int32_t id) -> int {
    const auto& n = tree.at(id);
    if (n.is_leaf()) return 0;
    int d = 1 + std::min(rec(n.child[0]), rec(n.child[1]));
    if (d > k) ok = false;
    return d;
  };
  rec(tree.root());
  return ok;
}

Branch sample_walk(const DecisionTree& tree, Rng& rng) {
  Branch br;
  std::int32_t id = tree.root();
  while (!tree.at(id).is_leaf()) {
    const auto& n = tree.at(id);
    bool b = rng.bit();
    br.steps.push_back({n.var, b});
    id = n.child[b ? 1 : 0];
  }
  br.leaf = tree.at(id).label;
  return br;
}

std::vector<std::pair<Branch, Rational>> exact_walk_distribution(const DecisionTree& tree) {
  if (tree.leaf_count() > (std::size_t{1} << 20)) {
    throw PreconditionError("exact_walk_distribution: more than 2^20 leaves");
  }
  std::vector<std::pair<Branch, Rational>> out;
  for (auto& br : branches(tree)) {
    Rational mass(1);
    mass /= Rational(boost::multiprecision::cpp_int(1) << br.steps.size());
    out.emplace_back(std::move(br), mass);
  }
  return out;
}

DecisionTree complement_tree(const DecisionTree& tree) {
  DecisionTree::Builder b;
  std::function<std::int32_t(std::int32_t)> rec = [&](std::int32_t id) -> std::int32_t {
    const auto& n = tree.at(id);
    if (n.is_leaf()) {
      Label l = n.label == Label::One ? Label::Zero : n.label == Label::Zero ? Label::One : Label::None;
      return b.leaf(l);
    }
    std::int32_t c0 = rec(n.child[0]);
    std::int32_t c1 = rec(n.child[1]);
    return b.node(n.var, c0, c1);
  };
  std::int32_t root = rec(tree.root());
  return std::move(b).finish(root);
}

DecisionTree term_tree(const Term& t) {
  DecisionTree::Builder b;
  std::int32_t cur = b.leaf(Label::One);
  const auto& lits = t.literals();
  for (auto it = lits.rbegin(); it != lits.rend(); ++it) {
    std::int32_t zero = b.leaf(Label::Zero);
    cur = it->positive ? b.node(it->var, zero, cur) : b.node(it->var, cur, zero);
  }
  return std::move(b).finish(cur);
}

DecisionTree exhaustive_tree(const std::vector<VarId>& vars, Label leaf_label) {
  DecisionTree::Builder b;
  std::function<std::int32_t(std::size_t)> rec = [&](std::size_t i) -> std::int32_t {
    if (i == vars.size()) return b.leaf(leaf_label);
    std::int32_t c0 = rec(i + 1);
    std::int32_t c1 = rec(i + 1);
    return b.node(vars[i], c0, c1);
  };
  std::int32_t root = rec(0);
  return std::move(b).finish(root);
}

std::string to_string(const Restriction& r) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& a : r.entries()) {
    if (!first) os << ", ";
    first = false;
    os << "x" << a.var.index << "=" << (a.value ? 1 : 0);
  }
  os << "}";
  return os.str();
}

std::string to_string(const Dnf& f) {
  if (f.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < f.terms().size(); ++i) {
    if (i) os << " | ";
    const auto& lits = f.terms()[i].literals();
    if (lits.empty()) os << "1";
    for (std::size_t j = 0; j < lits.size(); ++j) {
      if (j) os << "&";
      os << (lits[j].positive ? "" : "~") << "x" << lits[j].var.index;
    }
  }
  return os.str();
}

}  // namespace switchlab
