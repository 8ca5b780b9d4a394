#pragma once

#include "json.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "switchlab/boolcore.hpp"
#include "switchlab/gridgraph.hpp"
#include "switchlab/rng.hpp"

namespace switchlab {

// Independent per variable: * w.p. p, else 0 or 1 with equal probability.
Restriction sample_uniform(const std::vector<VarId>& vars, double p, Rng& rng);

struct GridParams {
  int n = 0;
  int delta = 0;

  int T() const { return 4 * delta * delta; }
  int m() const { return T() > 0 ? n / T() : 0; }
  int centers_per_subgrid() const { return delta; }
  int subgrid_count() const { return m() * m(); }
  // Throws PreconditionError. The restriction sampler needs m odd; the
  // atlas geometry alone does not.
  void validate(bool require_odd_m = true) const;
};

// Charge of the original instance on G_n: all ones, except vertex (0,0)
// carries 0 when n is even so that the total is odd.
Charge base_charge(const TorusGrid& grid);

struct CenterPos {
  int row = 0;
  int col = 0;
};

// Index = subgrid * delta + q, subgrid = a * m + b.
std::vector<CenterPos> layout_centers(const GridParams& params);

struct AtlasPath {
  int subgrid_a = 0;  // top (dir 1) or left (dir 0) subgrid
  int subgrid_b = 0;  // bottom or right neighbour
  int dir = 0;        // matches the G_m edge direction: 0 right, 1 down
  int i = 0;          // center index inside subgrid_a
  int j = 0;          // center index inside subgrid_b
  int center_a = 0;   // global center ids
  int center_b = 0;
  std::vector<Vertex> vertices;  // from center_a to center_b
  std::vector<VarId> edges;
};

struct PathOccurrence {
  int path = 0;
  int position = 0;   // edge index along the path, from center_a
  int distance = 0;   // edges from the nearest endpoint, counting this one
  int near_center = 0;
};

class PathAtlas {
 public:
  PathAtlas(GridParams params, std::vector<AtlasPath> paths);

  const GridParams& params() const { return params_; }
  const TorusGrid& grid() const { return grid_; }
  const std::vector<AtlasPath>& paths() const { return paths_; }
  const std::vector<CenterPos>& centers() const { return centers_; }
  const std::vector<PathOccurrence>& occurrences(VarId e) const { return by_edge_.at(e.index); }
  int path_index(int subgrid, int dir, int i, int j) const;
  Vertex center_vertex(int center) const;
  int subgrid_of_center(int center) const { return center / params_.delta; }
  // Copy with one path swapped out (fault-injection tests).
  PathAtlas with_path(int index, AtlasPath replacement) const;

 private:
  GridParams params_;
  TorusGrid grid_;
  std::vector<CenterPos> centers_;
  std::vector<AtlasPath> paths_;
  std::vector<std::vector<PathOccurrence>> by_edge_;
};

// The path for center pair (i, j) between `subgrid` and its neighbour in
// direction dir. join_shift moves the joining row (column) for tests.
AtlasPath build_path(const GridParams& params, int subgrid, int dir, int i, int j, int join_shift = 0);
PathAtlas build_path_atlas(const GridParams& params);

struct SharedEdge {
  VarId edge;
  int center = -1;  // common nearest endpoint, -1 if none
  int max_distance = 0;
  std::vector<int> paths;
};

struct DisjointnessReport {
  bool pass = true;
  std::size_t paths = 0;
  std::vector<SharedEdge> shared;
  std::vector<std::string> violations;
};

DisjointnessReport validate_disjointness(const PathAtlas& atlas);

struct AssociatedCenter {
  int center = 0;
  std::vector<int> far;  // S_e, sorted
};

std::optional<AssociatedCenter> associated_center(const PathAtlas& atlas, VarId e);

struct GridRestriction {
  GridParams params;
  std::vector<int> chosen;                // per subgrid, q in [0, delta)
  std::vector<std::int8_t> suggested;     // auxiliary solution, every edge
  EdgeValues values;                      // fixed value, -1 on live edges
  std::vector<std::int32_t> new_var;      // per edge, -1 if fixed
  std::vector<std::uint8_t> negated;      // per edge, 1 if x_e = not x_P
  std::vector<int> live_path;             // per new variable: atlas path
  std::vector<VarId> representative;      // per new variable
  TorusGrid new_grid{3};
  Charge new_charge;

  TseitinInstance new_instance() const { return {LiveGraph(new_grid), new_charge}; }
  int chosen_center(int subgrid) const { return subgrid * params.delta + chosen.at(subgrid); }
};

struct Fixed {
  bool value = false;
};
struct Mapped {
  VarId new_var;
  bool negated = false;
};
using EdgeImage = std::variant<Fixed, Mapped>;

GridRestriction sample_grid_restriction(const PathAtlas& atlas, Rng& rng);
// Rebuilds a restriction from chosen centers and the auxiliary solution.
GridRestriction assemble_grid_restriction(const PathAtlas& atlas, std::vector<int> chosen,
                                          std::vector<std::int8_t> suggested);
EdgeImage apply_grid_restriction(const GridRestriction& rho, VarId e);

// Full assignment on G_n from values of the new variables.
EdgeValues back_substitute(const GridRestriction& rho, const std::vector<std::uint8_t>& y);
// Vertices of G_n, other than chosen centers, whose constraint fails.
std::vector<Vertex> violated_noncenter_vertices(const GridRestriction& rho, const PathAtlas& atlas,
                                                const EdgeValues& x);
// Charge on G_m induced by the fixed part, derived from the original
// constraints at the chosen centers. Throws if a live path does not join
// the centers of its G_m edge.
Charge projected_charge(const GridRestriction& rho, const PathAtlas& atlas);

nlohmann::json to_json(const GridRestriction& rho);
GridRestriction grid_restriction_from_json(const nlohmann::json& doc, const PathAtlas& atlas);

}  // namespace switchlab
