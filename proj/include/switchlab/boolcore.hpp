#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "switchlab/rng.hpp"

namespace switchlab {

using Rational = boost::multiprecision::cpp_rational;

struct VarId {
  std::uint32_t index = 0;
  constexpr auto operator<=>(const VarId&) const = default;
};

struct Literal {
  VarId var;
  bool positive = true;
  constexpr bool operator==(const Literal&) const = default;
};

class Term {
 public:
  Term() = default;
  // Sorted by variable. A repeated variable is rejected.
  explicit Term(std::vector<Literal> literals);

  const std::vector<Literal>& literals() const { return lits_; }
  std::size_t width() const { return lits_.size(); }
  bool operator==(const Term&) const = default;

 private:
  std::vector<Literal> lits_;
};

enum class Constant { Zero, One };

class Dnf {
 public:
  Dnf() = default;
  // width_bound < 0 means "use the widest term".
  explicit Dnf(std::vector<Term> terms, int width_bound = -1);

  const std::vector<Term>& terms() const { return terms_; }
  int width_bound() const { return k_; }
  bool empty() const { return terms_.empty(); }
  bool operator==(const Dnf&) const = default;

 private:
  std::vector<Term> terms_;
  int k_ = 0;
};

struct Assignment {
  VarId var;
  bool value = false;
  constexpr auto operator<=>(const Assignment&) const = default;
};

// Partial assignment; variables outside the support are *.
class Restriction {
 public:
  Restriction() = default;
  explicit Restriction(std::vector<Assignment> entries);

  std::optional<bool> get(VarId v) const;
  bool assigned(VarId v) const { return get(v).has_value(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Assignment>& entries() const { return entries_; }

  Restriction with(VarId v, bool value) const;
  bool compatible(const Restriction& other) const;
  bool is_sub_restriction_of(const Restriction& other) const;
  // Union of two compatible restrictions.
  Restriction compose(const Restriction& other) const;

  bool operator==(const Restriction&) const = default;

 private:
  std::vector<Assignment> entries_;
};

std::variant<Term, Constant> restrict_term(const Term& t, const Restriction& beta);
// Returns Constant::One if a term is satisfied; an empty Dnf is constant 0.
std::variant<Dnf, Constant> restrict_dnf(const Dnf& f, const Restriction& beta);
// x is indexed by VarId::index.
bool evaluate(const Term& t, const std::vector<std::uint8_t>& x);
bool evaluate(const Dnf& f, const std::vector<std::uint8_t>& x);

enum class Label : std::uint8_t { Zero = 0, One = 1, None = 2 };

inline Label label_of(bool b) { return b ? Label::One : Label::Zero; }

class DecisionTree {
 public:
  struct Node {
    VarId var;
    std::int32_t child[2] = {-1, -1};
    Label label = Label::None;
    bool is_leaf() const { return child[0] < 0; }
  };

  // Arena builder; nodes are appended children first.
  class Builder {
   public:
    std::int32_t leaf(Label label);
    std::int32_t node(VarId var, std::int32_t c0, std::int32_t c1);
    std::int32_t graft(const DecisionTree& tree, std::int32_t at);
    std::int32_t graft(const DecisionTree& tree) { return graft(tree, tree.root()); }
    const Node& at(std::int32_t id) const { return nodes_[id]; }
    DecisionTree finish(std::int32_t root) &&;

   private:
    std::vector<Node> nodes_;
  };

  DecisionTree();  // a single unlabeled leaf
  static DecisionTree leaf(Label label);
  static DecisionTree leaf(bool b) { return leaf(label_of(b)); }
  static DecisionTree node(VarId var, const DecisionTree& c0, const DecisionTree& c1);

  std::int32_t root() const { return root_; }
  const Node& at(std::int32_t id) const { return nodes_[id]; }
  std::size_t arena_size() const { return nodes_.size(); }
  bool is_leaf() const { return at(root_).is_leaf(); }

  int depth() const;
  std::size_t leaf_count() const;
  bool is_proper() const;
  bool has_leaf(Label label) const;
  bool all_leaves(Label label) const;
  // Leaf reached by following x (indexed by VarId::index).
  Label evaluate(const std::vector<std::uint8_t>& x) const;
  std::vector<VarId> variables() const;

  bool operator==(const DecisionTree& other) const;
  std::string to_string() const;

 private:
  std::vector<Node> nodes_;
  std::int32_t root_ = 0;
};

struct Branch {
  std::vector<Assignment> steps;
  Label leaf = Label::None;

  Restriction as_restriction() const { return Restriction(steps); }
  std::size_t length() const { return steps.size(); }
  bool operator==(const Branch&) const = default;
  auto operator<=>(const Branch&) const = default;
};

enum class BranchSelect { Zero, One, Both };

// Depth-first, child 0 before child 1.
std::vector<Branch> branches(const DecisionTree& tree, BranchSelect which = BranchSelect::Both);
DecisionTree restrict_tree_simple(const DecisionTree& tree, const Restriction& beta);
bool is_k_clipped(const DecisionTree& tree, int k);
Branch sample_walk(const DecisionTree& tree, Rng& rng);
// Throws PreconditionError beyond 2^20 leaves.
std::vector<std::pair<Branch, Rational>> exact_walk_distribution(const DecisionTree& tree);
DecisionTree complement_tree(const DecisionTree& tree);

// Queries the term's literals in order, stopping at the first falsified one.
DecisionTree term_tree(const Term& t);
// Complete tree over vars in the given order.
DecisionTree exhaustive_tree(const std::vector<VarId>& vars, Label leaf_label = Label::None);

std::string to_string(const Restriction& r);
std::string to_string(const Dnf& f);

}  // namespace switchlab
