#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "switchlab/boolcore.hpp"
#include "switchlab/rng.hpp"

namespace switchlab {

using Vertex = std::uint32_t;

// Undirected multigraph with dense edge ids. Edge ids double as VarIds.
class Graph {
 public:
  // cycles, if given, lists short cycles of the graph as consecutive blocks
  // of cycle_length edges. It is only a hint for the bridge and component
  // scans.
  Graph(std::size_t num_vertices, std::vector<std::pair<Vertex, Vertex>> edges, std::vector<VarId> cycles = {},
        std::size_t cycle_length = 0);

  std::size_t num_vertices() const { return num_vertices_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::pair<Vertex, Vertex> endpoints(VarId e) const { return edges_.at(e.index); }
  const std::vector<VarId>& incident(Vertex v) const { return incident_.at(v); }

  // Set when the graph is connected and every edge lies on a listed cycle.
  bool has_cover() const { return covered_; }
  std::span<const std::uint32_t> cycles_of(VarId e) const {
    return {cycle_ids_.data() + cycle_begin_[e.index], cycle_ids_.data() + cycle_begin_[e.index + 1]};
  }
  std::span<const VarId> cycle(std::uint32_t c) const {
    return {cycles_.data() + c * cycle_length_, cycle_length_};
  }

 private:
  std::size_t num_vertices_;
  std::vector<std::pair<Vertex, Vertex>> edges_;
  std::vector<std::vector<VarId>> incident_;
  std::vector<VarId> cycles_;
  std::size_t cycle_length_ = 0;
  std::vector<std::uint32_t> cycle_begin_;  // per edge, into cycle_ids_
  std::vector<std::uint32_t> cycle_ids_;
  bool covered_ = false;
};

// n x n torus. Vertex (i,j) has id i*n+j; edge 2*(i*n+j)+dir joins it to
// (i,j+1) for dir 0 (right) and (i+1,j) for dir 1 (down), all mod n.
class TorusGrid {
 public:
  explicit TorusGrid(int n);

  int n() const { return n_; }
  const Graph& graph() const { return *graph_; }
  const std::shared_ptr<const Graph>& shared_graph() const { return graph_; }

  Vertex vertex(int i, int j) const;
  std::pair<int, int> coords(Vertex v) const { return {static_cast<int>(v) / n_, static_cast<int>(v) % n_}; }
  VarId edge(int i, int j, int dir) const;
  // Edge joining two adjacent vertices; throws if not adjacent.
  VarId edge_between(Vertex a, Vertex b) const;

 private:
  int n_;
  std::shared_ptr<const Graph> graph_;
};

// Odd n >= 3 only, as the Tseitin contradiction needs an odd vertex count.
TorusGrid build_grid(int n);
// Any n >= 3; used for the subgrid decomposition where n = mT is even.
TorusGrid build_torus(int n);

class LiveGraph {
 public:
  explicit LiveGraph(std::shared_ptr<const Graph> base);
  explicit LiveGraph(const TorusGrid& grid) : LiveGraph(grid.shared_graph()) {}

  const Graph& base() const { return *base_; }
  const std::shared_ptr<const Graph>& shared_base() const { return base_; }
  bool live(VarId e) const { return removed_.at(e.index) == 0; }
  std::size_t num_live_edges() const;
  int live_degree(Vertex v) const;
  std::vector<VarId> removed() const;

  LiveGraph without(const std::vector<VarId>& edges) const;
  LiveGraph without(const Restriction& beta) const;

 private:
  std::shared_ptr<const Graph> base_;
  std::vector<std::uint8_t> removed_;
};

using Charge = std::vector<std::uint8_t>;

struct TseitinInstance {
  LiveGraph graph;
  Charge charge;
};

Charge constant_charge(std::size_t num_vertices, bool value);

using Clause = std::vector<Literal>;
std::vector<Clause> tseitin_clauses(const TseitinInstance& inst);
void write_dimacs(std::ostream& os, const TseitinInstance& inst);

Charge restrict_charge(const Charge& alpha, const Restriction& beta, const LiveGraph& g);

struct Components {
  std::vector<int> label;            // per vertex
  std::vector<std::size_t> size;     // per component
  std::vector<std::uint8_t> charge;  // per component parity, if a charge was supplied
  std::optional<int> giant;
  std::size_t count() const { return size.size(); }
};

Components components(const LiveGraph& g);
Components components(const LiveGraph& g, const Charge& alpha);
std::optional<int> giant_component(const LiveGraph& g);
bool is_connected(const LiveGraph& g);

std::vector<VarId> bridges(const LiveGraph& g);
std::vector<VarId> closure_set(const LiveGraph& g, const std::vector<VarId>& s);

bool forced_bridge_value(const LiveGraph& g, const Charge& alpha, VarId e);
// Forced values for every bridge of g, in edge order.
std::vector<Assignment> forced_bridges(const LiveGraph& g, const Charge& alpha);

// Checked closure: beta must be g-independent and the closed support must
// leave a giant component.
Restriction closure_restriction(const LiveGraph& g, const Charge& alpha, const Restriction& beta);
// Unchecked closure: extends beta by the forced values of all bridges of
// g - supp(beta).
Restriction extend_by_bridges(const LiveGraph& g, const Charge& alpha, const Restriction& beta);

bool is_independent(const LiveGraph& g, const std::vector<VarId>& edges);
bool is_nice(const LiveGraph& g, const Charge& alpha);
bool pushes_contradiction(const LiveGraph& g, const Charge& alpha, const Restriction& beta);

// Per-edge values: 0/1 on live edges, -1 on removed edges.
using EdgeValues = std::vector<std::int8_t>;
EdgeValues sample_uniform_solution(const TseitinInstance& inst, Rng& rng);
bool satisfies(const TseitinInstance& inst, const EdgeValues& x);

}  // namespace switchlab
