#include "switchlab/restrictions.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "switchlab/error.hpp"

namespace switchlab {

Restriction sample_uniform(const std::vector<VarId>& vars, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw PreconditionError("star probability outside [0,1]");
  std::vector<Assignment> out;
  out.reserve(vars.size());
  for (VarId v : vars) {
    if (rng.coin(p)) continue;
    out.push_back({v, rng.bit()});
  }
  return Restriction(std::move(out));
}

void GridParams::validate(bool require_odd_m) const {
  if (delta < 1) throw PreconditionError("delta must be at least 1");
  if (n <= 0 || n % T() != 0) {
    throw PreconditionError("n = " + std::to_string(n) + " is not a multiple of T = " + std::to_string(T()));
  }
  if (m() < 3) throw PreconditionError("n / T must be at least 3");
  if (require_odd_m && m() % 2 == 0) throw PreconditionError("n / T must be odd");
}

Charge base_charge(const TorusGrid& grid) {
  Charge c = constant_charge(grid.graph().num_vertices(), true);
  if (grid.n() % 2 == 0) c[0] = 0;
  return c;
}

namespace {

// Offset of center 0 from the subgrid corner: Δ²/2 + 3Δ/2.
int center_offset(int delta) { return (delta * delta + 3 * delta) / 2; }

}  // namespace

std::vector<CenterPos> layout_centers(const GridParams& params) {
  params.validate(false);
  const int m = params.m();
  const int T = params.T();
  const int o = center_offset(params.delta);
  std::vector<CenterPos> out;
  out.reserve(static_cast<std::size_t>(m) * m * params.delta);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int q = 0; q < params.delta; ++q) {
        out.push_back({a * T + o + 3 * params.delta * q, b * T + o + 3 * params.delta * q});
      }
    }
  }
  return out;
}

AtlasPath build_path(const GridParams& params, int subgrid, int dir, int i, int j, int join_shift) {
  params.validate(false);
  const int m = params.m();
  const int T = params.T();
  const int d = params.delta;
  const int o = center_offset(d);
  const int a = subgrid / m;
  const int b = subgrid % m;
  if (i < 0 || i >= d || j < 0 || j >= d || (dir != 0 && dir != 1)) {
    throw PreconditionError("path index out of range");
  }
  // Oriented frame: u runs across the gap between the two subgrids, v runs
  // along it. dir 1 (vertical pair): u = row, v = column; dir 0: transposed.
  const int base_u = dir == 1 ? a * T : b * T;
  const int base_v = dir == 1 ? b * T : a * T;
  const int ut = base_u + o + 3 * d * i;
  const int vt = base_v + o + 3 * d * i;
  const int ub = base_u + T + o + 3 * d * j;
  const int vb = base_v + o + 3 * d * j;
  const int join = base_u + (7 * d * d + 1) / 2 + i * d + j + join_shift;

  std::vector<std::pair<int, int>> uv;
  uv.emplace_back(ut, vt);
  auto walk_to = [&](int u, int v) {
    while (uv.back().first != u || uv.back().second != v) {
      auto [cu, cv] = uv.back();
      if (cu != u) {
        cu += u > cu ? 1 : -1;
      } else {
        cv += v > cv ? 1 : -1;
      }
      uv.emplace_back(cu, cv);
    }
  };
  const int v_top = vt + j + 1;
  const int v_bottom = vb - i - 1;
  if (join <= ut || join >= ub) throw PreconditionError("join line outside the corridor");
  walk_to(ut, v_top);
  walk_to(join, v_top);
  walk_to(join, v_bottom);
  walk_to(ub, v_bottom);
  walk_to(ub, vb);

  // Torus indexing without materializing G_n.
  const int n = params.n;
  auto wrap = [n](int x) { return ((x % n) + n) % n; };
  auto vertex = [&](int r, int c) { return static_cast<Vertex>(wrap(r) * n + wrap(c)); };
  auto edge_between = [&](Vertex x, Vertex y) {
    const int xr = static_cast<int>(x) / n, xc = static_cast<int>(x) % n;
    const int yr = static_cast<int>(y) / n, yc = static_cast<int>(y) % n;
    if (vertex(xr, xc + 1) == y) return VarId{2 * x};
    if (vertex(yr, yc + 1) == x) return VarId{2 * y};
    if (vertex(xr + 1, xc) == y) return VarId{2 * x + 1};
    if (vertex(yr + 1, yc) == x) return VarId{2 * y + 1};
    throw InvariantViolation("path steps between non-adjacent vertices");
  };
  AtlasPath p;
  p.subgrid_a = subgrid;
  p.subgrid_b = dir == 1 ? ((a + 1) % m) * m + b : a * m + (b + 1) % m;
  p.dir = dir;
  p.i = i;
  p.j = j;
  p.center_a = subgrid * d + i;
  p.center_b = p.subgrid_b * d + j;
  for (auto [u, v] : uv) {
    p.vertices.push_back(dir == 1 ? vertex(u, v) : vertex(v, u));
  }
  std::set<Vertex> seen(p.vertices.begin(), p.vertices.end());
  if (seen.size() != p.vertices.size()) throw PreconditionError("path geometry revisits a vertex");
  for (std::size_t k = 1; k < p.vertices.size(); ++k) {
    p.edges.push_back(edge_between(p.vertices[k - 1], p.vertices[k]));
  }
  return p;
}

PathAtlas::PathAtlas(GridParams params, std::vector<AtlasPath> paths)
    : params_(params), grid_(params.n), centers_(layout_centers(params)), paths_(std::move(paths)) {
  by_edge_.assign(grid_.graph().num_edges(), {});
  for (std::size_t pi = 0; pi < paths_.size(); ++pi) {
    const auto& p = paths_[pi];
    const int len = static_cast<int>(p.edges.size());
    for (int k = 0; k < len; ++k) {
      const int da = k + 1;
      const int db = len - k;
      PathOccurrence occ;
      occ.path = static_cast<int>(pi);
      occ.position = k;
      occ.distance = std::min(da, db);
      occ.near_center = da <= db ? p.center_a : p.center_b;
      by_edge_[p.edges[k].index].push_back(occ);
    }
  }
}

int PathAtlas::path_index(int subgrid, int dir, int i, int j) const {
  const int d = params_.delta;
  return ((subgrid * 2 + dir) * d + i) * d + j;
}

Vertex PathAtlas::center_vertex(int center) const {
  const auto& c = centers_.at(center);
  return grid_.vertex(c.row, c.col);
}

PathAtlas PathAtlas::with_path(int index, AtlasPath replacement) const {
  std::vector<AtlasPath> copy = paths_;
  copy.at(index) = std::move(replacement);
  return PathAtlas(params_, std::move(copy));
}

PathAtlas build_path_atlas(const GridParams& params) {
  params.validate(false);
  const int d = params.delta;
  std::vector<AtlasPath> paths;
  paths.reserve(static_cast<std::size_t>(params.subgrid_count()) * 2 * d * d);
  for (int g = 0; g < params.subgrid_count(); ++g) {
    for (int dir = 0; dir < 2; ++dir) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) paths.push_back(build_path(params, g, dir, i, j));
      }
    }
  }
  PathAtlas atlas(params, std::move(paths));
  // Vertex (0,0) carries the parity correction of base_charge and must stay
  // off every path.
  for (const auto& p : atlas.paths()) {
    if (std::find(p.vertices.begin(), p.vertices.end(), Vertex{0}) != p.vertices.end()) {
      throw PreconditionError("a path passes through vertex (0,0)");
    }
  }
  return atlas;
}

DisjointnessReport validate_disjointness(const PathAtlas& atlas) {
  DisjointnessReport rep;
  rep.paths = atlas.paths().size();
  const int d = atlas.params().delta;
  const auto& paths = atlas.paths();
  for (std::size_t e = 0; e < atlas.grid().graph().num_edges(); ++e) {
    const VarId edge{static_cast<std::uint32_t>(e)};
    const auto& occ = atlas.occurrences(edge);
    if (occ.size() < 2) continue;
    SharedEdge s;
    s.edge = edge;
    for (const auto& o : occ) s.paths.push_back(o.path);
    // Candidate common endpoints: those shared by every path through e.
    std::set<int> common{paths[occ[0].path].center_a, paths[occ[0].path].center_b};
    for (const auto& o : occ) {
      std::set<int> ends{paths[o.path].center_a, paths[o.path].center_b};
      std::set<int> keep;
      std::set_intersection(common.begin(), common.end(), ends.begin(), ends.end(),
                            std::inserter(keep, keep.begin()));
      common = std::move(keep);
    }
    bool ok = false;
    for (int c : common) {
      int worst = 0;
      bool nearest_everywhere = true;
      for (const auto& o : occ) {
        const auto& p = paths[o.path];
        const int len = static_cast<int>(p.edges.size());
        const int dist = c == p.center_a ? o.position + 1 : len - o.position;
        worst = std::max(worst, dist);
        if (dist != o.distance) nearest_everywhere = false;
      }
      if (worst <= d && nearest_everywhere) {
        ok = true;
        s.center = c;
        s.max_distance = worst;
        break;
      }
    }
    if (!ok) {
      rep.pass = false;
      std::ostringstream msg;
      auto [u, v] = atlas.grid().graph().endpoints(edge);
      auto [ui, uj] = atlas.grid().coords(u);
      auto [vi, vj] = atlas.grid().coords(v);
      msg << "edge " << e << " (" << ui << "," << uj << ")-(" << vi << "," << vj << ") shared by paths";
      for (int p : s.paths) msg << " " << p;
      msg << " without a common endpoint within " << d << " edges";
      rep.violations.push_back(msg.str());
    }
    rep.shared.push_back(std::move(s));
  }
  return rep;
}

std::optional<AssociatedCenter> associated_center(const PathAtlas& atlas, VarId e) {
  const auto& occ = atlas.occurrences(e);
  if (occ.empty()) return std::nullopt;
  AssociatedCenter ac;
  ac.center = occ[0].near_center;
  for (const auto& o : occ) {
    if (o.near_center != ac.center) {
      throw InvariantViolation("paths through edge " + std::to_string(e.index) + " disagree on the nearest endpoint");
    }
    const auto& p = atlas.paths()[o.path];
    ac.far.push_back(p.center_a == ac.center ? p.center_b : p.center_a);
  }
  std::sort(ac.far.begin(), ac.far.end());
  ac.far.erase(std::unique(ac.far.begin(), ac.far.end()), ac.far.end());
  return ac;
}

GridRestriction assemble_grid_restriction(const PathAtlas& atlas, std::vector<int> chosen,
                                          std::vector<std::int8_t> suggested) {
  const GridParams& params = atlas.params();
  params.validate(true);
  const int m = params.m();
  const std::size_t ne = atlas.grid().graph().num_edges();
  if (chosen.size() != static_cast<std::size_t>(params.subgrid_count()) || suggested.size() != ne) {
    throw PreconditionError("grid restriction data has the wrong shape");
  }
  GridRestriction rho;
  rho.params = params;
  rho.chosen = std::move(chosen);
  rho.suggested = std::move(suggested);
  rho.values.assign(ne, -1);
  rho.new_var.assign(ne, -1);
  rho.negated.assign(ne, 0);
  rho.new_grid = build_grid(m);
  rho.live_path.assign(2 * static_cast<std::size_t>(m) * m, -1);
  rho.representative.assign(rho.live_path.size(), VarId{});
  for (int g = 0; g < params.subgrid_count(); ++g) {
    for (int dir = 0; dir < 2; ++dir) {
      const int a = g / m;
      const int b = g % m;
      const int nb = dir == 1 ? ((a + 1) % m) * m + b : a * m + (b + 1) % m;
      const int pi = atlas.path_index(g, dir, rho.chosen.at(g), rho.chosen.at(nb));
      const auto& path = atlas.paths()[pi];
      const std::int32_t var = 2 * g + dir;
      rho.live_path[var] = pi;
      for (VarId e : path.edges) {
        if (rho.new_var[e.index] >= 0) {
          throw InvariantViolation("live paths share edge " + std::to_string(e.index));
        }
        rho.new_var[e.index] = var;
        rho.negated[e.index] = rho.suggested[e.index] != 0 ? 1 : 0;
      }
      const bool a_smaller = atlas.center_vertex(path.center_a) < atlas.center_vertex(path.center_b);
      rho.representative[var] = a_smaller ? path.edges.front() : path.edges.back();
    }
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (rho.new_var[e] < 0) rho.values[e] = rho.suggested[e];
  }
  rho.new_charge = constant_charge(rho.new_grid.graph().num_vertices(), true);
  return rho;
}

GridRestriction sample_grid_restriction(const PathAtlas& atlas, Rng& rng) {
  const GridParams& params = atlas.params();
  params.validate(true);
  std::vector<int> chosen(params.subgrid_count());
  for (auto& q : chosen) q = static_cast<int>(rng.below(static_cast<std::uint64_t>(params.delta)));
  Charge aux = base_charge(atlas.grid());
  for (int g = 0; g < params.subgrid_count(); ++g) aux[atlas.center_vertex(g * params.delta + chosen[g])] = 0;
  EdgeValues x = sample_uniform_solution({LiveGraph(atlas.grid()), aux}, rng);
  return assemble_grid_restriction(atlas, std::move(chosen), std::vector<std::int8_t>(x.begin(), x.end()));
}

EdgeImage apply_grid_restriction(const GridRestriction& rho, VarId e) {
  const std::int32_t v = rho.new_var.at(e.index);
  if (v < 0) return Fixed{rho.values[e.index] != 0};
  return Mapped{VarId{static_cast<std::uint32_t>(v)}, rho.negated[e.index] != 0};
}

EdgeValues back_substitute(const GridRestriction& rho, const std::vector<std::uint8_t>& y) {
  EdgeValues x(rho.values.size());
  for (std::size_t e = 0; e < x.size(); ++e) {
    if (rho.new_var[e] < 0) {
      x[e] = rho.values[e];
    } else {
      x[e] = static_cast<std::int8_t>((y.at(rho.new_var[e]) ^ rho.negated[e]) & 1);
    }
  }
  return x;
}

std::vector<Vertex> violated_noncenter_vertices(const GridRestriction& rho, const PathAtlas& atlas,
                                                const EdgeValues& x) {
  const Graph& g = atlas.grid().graph();
  Charge alpha = base_charge(atlas.grid());
  std::vector<std::uint8_t> is_center(g.num_vertices(), 0);
  for (int s = 0; s < rho.params.subgrid_count(); ++s) is_center[atlas.center_vertex(rho.chosen_center(s))] = 1;
  std::vector<Vertex> bad;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (is_center[v]) continue;
    std::uint8_t p = 0;
    for (VarId e : g.incident(v)) p ^= static_cast<std::uint8_t>(x.at(e.index) & 1);
    if (p != alpha[v]) bad.push_back(v);
  }
  return bad;
}

Charge projected_charge(const GridRestriction& rho, const PathAtlas& atlas) {
  const Graph& g = atlas.grid().graph();
  const Graph& gm = rho.new_grid.graph();
  Charge alpha = base_charge(atlas.grid());
  Charge out(gm.num_vertices(), 0);
  for (int s = 0; s < rho.params.subgrid_count(); ++s) {
    const Vertex c = atlas.center_vertex(rho.chosen_center(s));
    std::uint8_t q = alpha[c];
    std::vector<std::int32_t> vars;
    for (VarId e : g.incident(c)) {
      if (rho.new_var[e.index] < 0) {
        q ^= static_cast<std::uint8_t>(rho.values[e.index]);
      } else {
        q ^= rho.negated[e.index];
        vars.push_back(rho.new_var[e.index]);
      }
    }
    // The center's live edges must be exactly its four G_m edges.
    std::vector<std::int32_t> expect;
    for (VarId e : gm.incident(static_cast<Vertex>(s))) expect.push_back(static_cast<std::int32_t>(e.index));
    std::sort(vars.begin(), vars.end());
    std::sort(expect.begin(), expect.end());
    if (vars != expect) {
      throw InvariantViolation("chosen center of subgrid " + std::to_string(s) + " does not meet its G_m edges");
    }
    out[s] = q;
  }
  return out;
}

nlohmann::json to_json(const GridRestriction& rho) {
  nlohmann::json doc;
  doc["n"] = rho.params.n;
  doc["delta"] = rho.params.delta;
  doc["chosen"] = rho.chosen;
  doc["suggested"] = rho.suggested;
  nlohmann::json proj = nlohmann::json::array();
  for (std::size_t e = 0; e < rho.new_var.size(); ++e) {
    if (rho.new_var[e] >= 0) proj.push_back({e, rho.new_var[e], rho.negated[e] != 0});
  }
  doc["projection"] = std::move(proj);
  std::vector<std::uint32_t> reps;
  for (VarId r : rho.representative) reps.push_back(r.index);
  doc["representative"] = reps;
  return doc;
}

GridRestriction grid_restriction_from_json(const nlohmann::json& doc, const PathAtlas& atlas) {
  if (doc.at("n").get<int>() != atlas.params().n || doc.at("delta").get<int>() != atlas.params().delta) {
    throw PreconditionError("grid restriction document does not match the atlas parameters");
  }
  return assemble_grid_restriction(atlas, doc.at("chosen").get<std::vector<int>>(),
                                   doc.at("suggested").get<std::vector<std::int8_t>>());
}

}  // namespace switchlab
