#pragma once

#include <functional>
#include <vector>

#include "switchlab/boolcore.hpp"
#include "switchlab/restrictions.hpp"
#include "switchlab/treeops.hpp"

namespace switchlab {

using DnfFamily = std::vector<Dnf>;

// Term by term: the term tree of C_i, restricted by the current path, is
// attached to every 0-leaf unless it has no 1-leaf.
DecisionTree build_cdt(const Dnf& f);
DecisionTree build_cdt(const std::variant<Dnf, Constant>& f);

// Same iteration with the closure-aware partial restriction. pi must push
// the contradiction in ctx.
DecisionTree build_cdt_independent(const Dnf& f, const GoodTreeContext& ctx, const Restriction& pi);

struct CcdtBuilder {
  // Decision tree of member f under the common-tree path pi.
  std::function<DecisionTree(const Dnf& f, const Restriction& pi)> member_tree;
  // The exhaustive block tree T_eta as attached under pi.
  std::function<DecisionTree(const DecisionTree& block, const Restriction& pi)> block_tree;
};

// CDT(F|pi).
CcdtBuilder plain_builder();
// CDT(F|pi) | rho with the standard restriction: the trees Algorithm A
// walks while following rho.
CcdtBuilder tree_first_builder(const Restriction& rho);
// Independent CDTs in ctx; blocks pruned by the partial restriction.
CcdtBuilder independent_builder(const GoodTreeContext& ctx);

struct Ccdt {
  DecisionTree tree;
  std::vector<int> origin;  // per arena node: contributing member, -1 at leaves
};

// Throws PreconditionError if a path grows beyond max_depth.
Ccdt build_ccdt(const DnfFamily& family, int ell, const CcdtBuilder& builder, int max_depth = 256);

DnfFamily restrict_family(const DnfFamily& family, const Restriction& rho);
// F|rho over the variables of G_m: fixed literals are evaluated, path
// literals become literals of the new variable with the path polarity.
Dnf project_dnf(const Dnf& f, const GridRestriction& rho);
DnfFamily project_family(const DnfFamily& family, const GridRestriction& rho);

// depth(CCDT_ell(F|rho)) with the uniform (standard) restriction.
int ccdt_depth_uniform(const DnfFamily& family, int ell, const Restriction& rho);
// depth(CCDT_ell(F|rho)) with the grid restriction and independent CDTs on
// the projected grid; k bounds the depth of intermediate trees.
int ccdt_depth_grid(const DnfFamily& family, int ell, const GridRestriction& rho, int k);

// Leftmost (child 0 first) root path of the given length.
std::vector<Assignment> leftmost_path(const DecisionTree& tree, int length);
// Follows path from the root; false if it leaves the tree.
bool follows(const DecisionTree& tree, const std::vector<Assignment>& path);

struct Responsibility {
  std::vector<int> members;  // indices into the family, in path order
  bool reproduced = false;   // rebuilding on the subfamily yields the path
};

Responsibility responsible_subfamily(const DnfFamily& family, int ell, const CcdtBuilder& builder,
                                     const std::vector<Assignment>& path);

}  // namespace switchlab
