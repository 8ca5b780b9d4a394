#pragma once

#include <string>
#include <vector>

#include "switchlab/boolcore.hpp"
#include "switchlab/gridgraph.hpp"
#include "switchlab/restrictions.hpp"

namespace switchlab {

struct GoodTreeContext {
  LiveGraph graph;
  Charge charge;
  int k = 0;  // strict depth bound
};

bool is_good_tree(const DecisionTree& tree, const GoodTreeContext& ctx);

struct FullRestrictOptions {
  // Disabling bridge pruning is only meaningful for fault-injection tests.
  bool prune_bridges = true;
};

// Context of the projected instance (G_m with its all-ones charge).
GoodTreeContext projected_context(const GridRestriction& rho, int k);

// The full-restriction procedure: substitute fixed edges, relabel path
// edges to their new variable (swapping children on negative polarity),
// collapse repeated queries, and prune bridges of the projected grid to the
// child that keeps the contradiction in the giant component.
DecisionTree restrict_tree_full(const DecisionTree& tree, const GridRestriction& rho, const GoodTreeContext& ctx,
                                FullRestrictOptions options = {});

// The partial-restriction procedure: at every node take the closure of the
// current restriction, follow set edges and branch on starred ones.
DecisionTree restrict_tree_partial(const DecisionTree& tree, const Restriction& beta, const GoodTreeContext& ctx);

struct SurvivalReport {
  bool pass = true;
  std::size_t branches = 0;
  std::size_t survivors = 0;
  std::vector<std::string> mismatches;
};

// For each branch of T: survival (the restriction procedure, run along the
// branch, reaches its leaf) against the decomposition characterisation
// (fixed part agrees with rho; mapped part is a consistent assignment to the
// new variables that pushes the contradiction in G_m).
SurvivalReport check_survival_full(const DecisionTree& tree, const GridRestriction& rho, const GoodTreeContext& ctx,
                                   FullRestrictOptions options = {});

// For each branch pi of T: survival of the partial procedure against
// "pi is compatible with beta and beta o pi pushes the contradiction". Also
// checks that every branch of the restricted tree pushes the contradiction.
SurvivalReport check_survival_partial(const DecisionTree& tree, const Restriction& beta, const GoodTreeContext& ctx);

// The unique branch of T that is a sub-restriction of rho o cl(pi') and has
// the same leaf. Throws PreconditionError if pi' is not a branch of T|rho and
// InvariantViolation if zero or several branches qualify.
Branch map_branch_back(const DecisionTree& tree, const GridRestriction& rho, const GoodTreeContext& ctx,
                       const Branch& projected);

// rho o cl(pi') lifted to the edges of G_n.
Restriction lift_projected(const GridRestriction& rho, const Restriction& projected_closure);

// Def. 5.2. "T|pi = b" is read as: every leaf of T|pi is labelled b.
bool check_consistent(const DecisionTree& t1, const DecisionTree& t2, const GoodTreeContext& ctx);
bool check_neg_consistent(const DecisionTree& t1, const DecisionTree& t2, const GoodTreeContext& ctx);
bool check_represents(const DecisionTree& tree, const std::vector<DecisionTree>& parts, const GoodTreeContext& ctx);

}  // namespace switchlab
