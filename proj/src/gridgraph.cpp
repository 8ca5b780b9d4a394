#include "switchlab/gridgraph.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

#include "switchlab/error.hpp"

namespace switchlab {

Graph::Graph(std::size_t num_vertices, std::vector<std::pair<Vertex, Vertex>> edges, std::vector<VarId> cycles,
             std::size_t cycle_length)
    : num_vertices_(num_vertices),
      edges_(std::move(edges)),
      incident_(num_vertices),
      cycles_(std::move(cycles)),
      cycle_length_(cycle_length) {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto [u, v] = edges_[e];
    if (u >= num_vertices_ || v >= num_vertices_) throw PreconditionError("edge endpoint out of range");
    if (u == v) throw PreconditionError("self-loops are not supported");
    incident_[u].push_back(VarId{static_cast<std::uint32_t>(e)});
    incident_[v].push_back(VarId{static_cast<std::uint32_t>(e)});
  }
  cycle_begin_.assign(edges_.size() + 1, 0);
  if (cycles_.empty()) return;
  if (cycle_length_ < 2 || cycles_.size() % cycle_length_ != 0) throw PreconditionError("malformed cycle list");
  const std::size_t count = cycles_.size() / cycle_length_;
  for (VarId e : cycles_) {
    if (e.index >= edges_.size()) throw PreconditionError("cycle edge out of range");
    ++cycle_begin_[e.index + 1];
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) cycle_begin_[e + 1] += cycle_begin_[e];
  cycle_ids_.resize(cycles_.size());
  std::vector<std::uint32_t> fill(cycle_begin_.begin(), cycle_begin_.end() - 1);
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t k = 0; k < cycle_length_; ++k) cycle_ids_[fill[cycles_[c * cycle_length_ + k].index]++] = c;
  covered_ = true;
  for (std::size_t e = 0; e < edges_.size() && covered_; ++e) covered_ = cycle_begin_[e + 1] > cycle_begin_[e];
  if (covered_ && num_vertices_ > 0) {
    std::vector<std::uint8_t> seen(num_vertices_, 0);
    std::vector<Vertex> queue{0};
    seen[0] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (VarId e : incident_[queue[h]]) {
        auto [x, y] = edges_[e.index];
        const Vertex w = x == queue[h] ? y : x;
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    covered_ = queue.size() == num_vertices_;
  }
}

TorusGrid::TorusGrid(int n) : n_(n) {
  if (n < 3) throw PreconditionError("torus side must be at least 3");
  std::vector<std::pair<Vertex, Vertex>> edges;
  edges.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      edges.emplace_back(vertex(i, j), vertex(i, j + 1));
      edges.emplace_back(vertex(i, j), vertex(i + 1, j));
    }
  }
  // Unit squares: each edge lies on two.
  std::vector<VarId> squares;
  squares.reserve(4 * static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (VarId e : {edge(i, j, 0), edge(i, j + 1, 1), edge(i + 1, j, 0), edge(i, j, 1)}) squares.push_back(e);
    }
  }
  graph_ = std::make_shared<const Graph>(static_cast<std::size_t>(n) * n, std::move(edges), std::move(squares), 4);
}

Vertex TorusGrid::vertex(int i, int j) const {
  i = ((i % n_) + n_) % n_;
  j = ((j % n_) + n_) % n_;
  return static_cast<Vertex>(i * n_ + j);
}

VarId TorusGrid::edge(int i, int j, int dir) const {
  return VarId{2 * vertex(i, j) + static_cast<std::uint32_t>(dir)};
}

VarId TorusGrid::edge_between(Vertex a, Vertex b) const {
  auto [ai, aj] = coords(a);
  auto [bi, bj] = coords(b);
  if (vertex(ai, aj + 1) == b) return edge(ai, aj, 0);
  if (vertex(bi, bj + 1) == a) return edge(bi, bj, 0);
  if (vertex(ai + 1, aj) == b) return edge(ai, aj, 1);
  if (vertex(bi + 1, bj) == a) return edge(bi, bj, 1);
  throw PreconditionError("vertices " + std::to_string(a) + " and " + std::to_string(b) + " are not adjacent");
}

TorusGrid build_grid(int n) {
  if (n < 3 || n % 2 == 0) throw PreconditionError("grid side must be odd and at least 3");
  return TorusGrid(n);
}

TorusGrid build_torus(int n) { return TorusGrid(n); }

LiveGraph::LiveGraph(std::shared_ptr<const Graph> base)
    : base_(std::move(base)), removed_(base_->num_edges(), 0) {}

std::size_t LiveGraph::num_live_edges() const {
  return static_cast<std::size_t>(std::count(removed_.begin(), removed_.end(), 0));
}

int LiveGraph::live_degree(Vertex v) const {
  int d = 0;
  for (VarId e : base_->incident(v)) d += live(e) ? 1 : 0;
  return d;
}

std::vector<VarId> LiveGraph::removed() const {
  std::vector<VarId> out;
  for (std::size_t e = 0; e < removed_.size(); ++e) {
    if (removed_[e]) out.push_back(VarId{static_cast<std::uint32_t>(e)});
  }
  return out;
}

LiveGraph LiveGraph::without(const std::vector<VarId>& edges) const {
  LiveGraph g = *this;
  for (VarId e : edges) g.removed_.at(e.index) = 1;
  return g;
}

LiveGraph LiveGraph::without(const Restriction& beta) const {
  LiveGraph g = *this;
  for (const auto& a : beta.entries()) g.removed_.at(a.var.index) = 1;
  return g;
}

Charge constant_charge(std::size_t num_vertices, bool value) {
  return Charge(num_vertices, value ? 1 : 0);
}

std::vector<Clause> tseitin_clauses(const TseitinInstance& inst) {
  const Graph& g = inst.graph.base();
  std::vector<Clause> out;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (inst.graph.live_degree(v) != 4) {
      throw PreconditionError("clause encoding needs every vertex at live degree 4");
    }
    std::vector<VarId> inc = g.incident(v);
    std::sort(inc.begin(), inc.end());
    for (unsigned a = 0; a < 16; ++a) {
      if (static_cast<unsigned>(std::popcount(a) & 1) == inst.charge.at(v)) continue;
      Clause c;
      for (unsigned b = 0; b < 4; ++b) c.push_back(Literal{inc[b], ((a >> b) & 1) == 0});
      out.push_back(std::move(c));
    }
  }
  return out;
}

void write_dimacs(std::ostream& os, const TseitinInstance& inst) {
  auto clauses = tseitin_clauses(inst);
  os << "p cnf " << inst.graph.base().num_edges() << " " << clauses.size() << "\n";
  for (const auto& c : clauses) {
    for (const auto& lit : c) {
      os << (lit.positive ? "" : "-") << (lit.var.index + 1) << " ";
    }
    os << "0\n";
  }
}

Charge restrict_charge(const Charge& alpha, const Restriction& beta, const LiveGraph& g) {
  Charge out = alpha;
  for (const auto& a : beta.entries()) {
    if (!g.live(a.var)) throw PreconditionError("restriction assigns a removed edge");
    if (a.value) {
      auto [u, v] = g.base().endpoints(a.var);
      out.at(u) ^= 1;
      out.at(v) ^= 1;
    }
  }
  return out;
}

namespace {

// Whether e lies on a cycle whose other edges are all live.
bool has_live_cycle(const LiveGraph& g, VarId e) {
  for (std::uint32_t c : g.base().cycles_of(e)) {
    const auto edges = g.base().cycle(c);
    if (std::all_of(edges.begin(), edges.end(), [&](VarId f) { return f == e || g.live(f); })) return true;
  }
  return false;
}

// Removing edges whose endpoints stay joined by a live cycle keeps a
// connected graph connected.
bool stays_connected(const LiveGraph& g) {
  const Graph& base = g.base();
  for (std::uint32_t e = 0; e < base.num_edges(); ++e)
    if (!g.live(VarId{e}) && !has_live_cycle(g, VarId{e})) return false;
  return true;
}

// A live edge on a live cycle is not a bridge; only edges next to removed
// ones can lose all their cycles.
bool bridge_free(const LiveGraph& g) {
  const Graph& base = g.base();
  for (std::uint32_t e = 0; e < base.num_edges(); ++e) {
    if (g.live(VarId{e})) continue;
    for (std::uint32_t c : base.cycles_of(VarId{e}))
      for (VarId f : base.cycle(c))
        if (g.live(f) && !has_live_cycle(g, f)) return false;
  }
  return true;
}

Components components_impl(const LiveGraph& g, const Charge* alpha) {
  const Graph& base = g.base();
  const std::size_t nv = base.num_vertices();
  Components c;
  if (base.has_cover() && nv > 0 && stays_connected(g)) {
    c.label.assign(nv, 0);
    c.size.assign(1, nv);
    std::uint8_t q = 0;
    if (alpha)
      for (std::size_t v = 0; v < nv; ++v) q ^= (*alpha)[v] & 1;
    c.charge.assign(1, q);
    c.giant = 0;
    return c;
  }
  c.label.assign(nv, -1);
  std::vector<Vertex> queue;
  for (Vertex s = 0; s < nv; ++s) {
    if (c.label[s] >= 0) continue;
    const int id = static_cast<int>(c.size.size());
    c.size.push_back(0);
    c.charge.push_back(0);
    queue.assign(1, s);
    c.label[s] = id;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      Vertex v = queue[h];
      ++c.size[id];
      if (alpha) c.charge[id] ^= (*alpha)[v] & 1;
      for (VarId e : base.incident(v)) {
        if (!g.live(e)) continue;
        auto [a, b] = base.endpoints(e);
        Vertex w = a == v ? b : a;
        if (c.label[w] < 0) {
          c.label[w] = id;
          queue.push_back(w);
        }
      }
    }
    if (2 * c.size[id] > nv) c.giant = id;
  }
  return c;
}

struct BridgeInfo {
  VarId edge;
  int component;
  std::size_t child_size;       // vertices on the DFS-subtree side
  std::uint8_t child_charge;    // parity of the charge on that side
  Vertex child_min;             // smallest vertex on that side
};

// Lowpoint DFS (iterative). Reports each bridge with the aggregates of the
// side hanging below it in the DFS tree.
std::vector<BridgeInfo> scan_bridges(const LiveGraph& g, const Charge* alpha) {
  const Graph& base = g.base();
  if (base.has_cover() && bridge_free(g)) return {};
  const std::size_t nv = base.num_vertices();
  std::vector<int> disc(nv, -1), low(nv, 0), comp(nv, -1);
  std::vector<std::size_t> sub_size(nv, 0);
  std::vector<std::uint8_t> sub_charge(nv, 0);
  std::vector<Vertex> sub_min(nv, 0);
  std::vector<BridgeInfo> out;

  struct Frame {
    Vertex v;
    std::int64_t parent_edge;
    std::size_t next;
  };
  std::vector<Frame> stack;
  int timer = 0;
  int comp_id = 0;
  for (Vertex root = 0; root < nv; ++root) {
    if (disc[root] >= 0) continue;
    stack.push_back({root, -1, 0});
    disc[root] = low[root] = timer++;
    comp[root] = comp_id;
    sub_size[root] = 1;
    sub_charge[root] = alpha ? ((*alpha)[root] & 1) : 0;
    sub_min[root] = root;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& inc = base.incident(f.v);
      if (f.next < inc.size()) {
        VarId e = inc[f.next++];
        if (!g.live(e) || static_cast<std::int64_t>(e.index) == f.parent_edge) continue;
        auto [a, b] = base.endpoints(e);
        Vertex w = a == f.v ? b : a;
        if (disc[w] < 0) {
          disc[w] = low[w] = timer++;
          comp[w] = comp_id;
          sub_size[w] = 1;
          sub_charge[w] = alpha ? ((*alpha)[w] & 1) : 0;
          sub_min[w] = w;
          stack.push_back({w, static_cast<std::int64_t>(e.index), 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[w]);
        }
        continue;
      }
      Frame done = f;
      stack.pop_back();
      if (stack.empty()) break;
      Vertex p = stack.back().v;
      low[p] = std::min(low[p], low[done.v]);
      sub_size[p] += sub_size[done.v];
      sub_charge[p] ^= sub_charge[done.v];
      sub_min[p] = std::min(sub_min[p], sub_min[done.v]);
      if (low[done.v] > disc[p]) {
        out.push_back({VarId{static_cast<std::uint32_t>(done.parent_edge)}, comp_id, sub_size[done.v],
                       sub_charge[done.v], sub_min[done.v]});
      }
    }
    ++comp_id;
  }
  std::sort(out.begin(), out.end(), [](const BridgeInfo& a, const BridgeInfo& b) { return a.edge < b.edge; });
  return out;
}

bool forced_value(const BridgeInfo& info, const Components& comps) {
  const std::size_t total = comps.size[info.component];
  const std::uint8_t q = comps.charge[info.component];
  // The component's smallest vertex is the DFS root, which is never on the
  // subtree side, so on a size tie the other side is C1.
  const std::size_t other = total - info.child_size;
  const bool child_is_c1 = info.child_size > other;
  const std::uint8_t q1 = child_is_c1 ? info.child_charge : static_cast<std::uint8_t>(q ^ info.child_charge);
  return (q1 ^ q) != 0;
}

}  // namespace

Components components(const LiveGraph& g) { return components_impl(g, nullptr); }

Components components(const LiveGraph& g, const Charge& alpha) { return components_impl(g, &alpha); }

std::optional<int> giant_component(const LiveGraph& g) { return components(g).giant; }

bool is_connected(const LiveGraph& g) { return components(g).count() <= 1; }

std::vector<VarId> bridges(const LiveGraph& g) {
  std::vector<VarId> out;
  for (const auto& b : scan_bridges(g, nullptr)) out.push_back(b.edge);
  return out;
}

std::vector<VarId> closure_set(const LiveGraph& g, const std::vector<VarId>& s) {
  std::vector<VarId> out = s;
  for (VarId e : bridges(g.without(s))) out.push_back(e);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool forced_bridge_value(const LiveGraph& g, const Charge& alpha, VarId e) {
  auto infos = scan_bridges(g, &alpha);
  auto it = std::find_if(infos.begin(), infos.end(), [&](const BridgeInfo& b) { return b.edge == e; });
  if (it == infos.end()) throw PreconditionError("edge " + std::to_string(e.index) + " is not a bridge");
  return forced_value(*it, components(g, alpha));
}

std::vector<Assignment> forced_bridges(const LiveGraph& g, const Charge& alpha) {
  auto infos = scan_bridges(g, &alpha);
  if (infos.empty()) return {};
  Components comps = components(g, alpha);
  std::vector<Assignment> out;
  out.reserve(infos.size());
  for (const auto& info : infos) out.push_back({info.edge, forced_value(info, comps)});
  return out;
}

Restriction extend_by_bridges(const LiveGraph& g, const Charge& alpha, const Restriction& beta) {
  LiveGraph rest = g.without(beta);
  Charge induced = restrict_charge(alpha, beta, g);
  auto forced = forced_bridges(rest, induced);
  if (forced.empty()) return beta;
  return beta.compose(Restriction(std::move(forced)));
}

Restriction closure_restriction(const LiveGraph& g, const Charge& alpha, const Restriction& beta) {
  std::vector<VarId> supp;
  for (const auto& a : beta.entries()) supp.push_back(a.var);
  if (!is_independent(g, supp)) throw PreconditionError("closure_restriction: restriction is not independent");
  Restriction closed = extend_by_bridges(g, alpha, beta);
  if (!giant_component(g.without(closed))) {
    throw PreconditionError("closure_restriction: closed support leaves no giant component");
  }
  return closed;
}

bool is_independent(const LiveGraph& g, const std::vector<VarId>& edges) {
  return is_connected(g.without(edges));
}

bool is_nice(const LiveGraph& g, const Charge& alpha) {
  Components c = components(g, alpha);
  if (!c.giant) return false;
  for (std::size_t i = 0; i < c.count(); ++i) {
    const bool is_giant = static_cast<int>(i) == *c.giant;
    if ((c.charge[i] == 1) != is_giant) return false;
  }
  return true;
}

bool pushes_contradiction(const LiveGraph& g, const Charge& alpha, const Restriction& beta) {
  for (const auto& a : beta.entries()) {
    if (!g.live(a.var)) return false;
  }
  return is_nice(g.without(beta), restrict_charge(alpha, beta, g));
}

EdgeValues sample_uniform_solution(const TseitinInstance& inst, Rng& rng) {
  const LiveGraph& g = inst.graph;
  const Graph& base = g.base();
  const std::size_t nv = base.num_vertices();
  Components comps = components(g, inst.charge);
  for (std::size_t i = 0; i < comps.count(); ++i) {
    if (comps.charge[i]) throw PreconditionError("unsatisfiable Tseitin instance: odd component charge");
  }
  // BFS spanning forest; parent_edge < 0 marks roots.
  std::vector<std::int64_t> parent_edge(nv, -2);
  std::vector<Vertex> order;
  order.reserve(nv);
  std::vector<std::uint8_t> tree_edge(base.num_edges(), 0);
  for (Vertex s = 0; s < nv; ++s) {
    if (parent_edge[s] != -2) continue;
    parent_edge[s] = -1;
    std::size_t head = order.size();
    order.push_back(s);
    for (; head < order.size(); ++head) {
      Vertex v = order[head];
      for (VarId e : base.incident(v)) {
        if (!g.live(e)) continue;
        auto [a, b] = base.endpoints(e);
        Vertex w = a == v ? b : a;
        if (parent_edge[w] == -2) {
          parent_edge[w] = e.index;
          tree_edge[e.index] = 1;
          order.push_back(w);
        }
      }
    }
  }
  EdgeValues x(base.num_edges(), -1);
  std::vector<std::uint8_t> parity(nv, 0);
  for (std::size_t e = 0; e < base.num_edges(); ++e) {
    if (!g.live(VarId{static_cast<std::uint32_t>(e)}) || tree_edge[e]) continue;
    const bool b = rng.bit();
    x[e] = b ? 1 : 0;
    if (b) {
      auto [u, v] = base.endpoints(VarId{static_cast<std::uint32_t>(e)});
      parity[u] ^= 1;
      parity[v] ^= 1;
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Vertex v = *it;
    if (parent_edge[v] < 0) continue;
    const std::uint8_t need = (inst.charge[v] ^ parity[v]) & 1;
    const VarId e{static_cast<std::uint32_t>(parent_edge[v])};
    x[e.index] = static_cast<std::int8_t>(need);
    if (need) {
      auto [a, b] = base.endpoints(e);
      parity[a] ^= 1;
      parity[b] ^= 1;
    }
  }
  if (!satisfies(inst, x)) throw InvariantViolation("uniform solution sampler produced a violating assignment");
  return x;
}

bool satisfies(const TseitinInstance& inst, const EdgeValues& x) {
  const Graph& base = inst.graph.base();
  for (Vertex v = 0; v < base.num_vertices(); ++v) {
    std::uint8_t p = 0;
    for (VarId e : base.incident(v)) {
      if (!inst.graph.live(e)) continue;
      if (x.at(e.index) < 0) return false;
      p ^= static_cast<std::uint8_t>(x[e.index]);
    }
    if (p != (inst.charge.at(v) & 1)) return false;
  }
  return true;
}

}  // namespace switchlab
