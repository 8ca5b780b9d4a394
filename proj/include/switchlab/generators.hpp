#pragma once

#include <vector>

#include "switchlab/boolcore.hpp"
#include "switchlab/restrictions.hpp"
#include "switchlab/rng.hpp"
#include "switchlab/treeops.hpp"

namespace switchlab {

// Random k-DNF over num_vars variables: each term has k distinct variables
// and uniform signs.
Dnf random_kdnf(int num_vars, int k, int num_terms, Rng& rng);

// Random tree of depth <= max_depth over pool, no variable repeated on a
// branch. Internal nodes stop early with probability stop; leaves are
// uniform 0/1.
DecisionTree random_tree(const std::vector<VarId>& pool, int max_depth, double stop, Rng& rng);

// As random_tree, but every branch stays independent in ctx and the depth
// stays below ctx.k.
DecisionTree random_good_tree(const std::vector<VarId>& pool, const GoodTreeContext& ctx, int max_depth, double stop,
                              Rng& rng);

// Edges of the live paths of subgrid s and of its two outgoing pairs, plus
// a few fixed edges next to them: a pool whose trees hit projected bridges.
std::vector<VarId> live_edge_pool(const PathAtlas& atlas, const GridRestriction& rho, int subgrid, int fixed_extra);

}  // namespace switchlab
