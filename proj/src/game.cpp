#include "switchlab/game.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "switchlab/error.hpp"

namespace switchlab {

namespace {

const char* class_name(StarClass c) {
  switch (c) {
    case StarClass::Good: return "good";
    case StarClass::Bad: return "bad";
    case StarClass::Residual: return "residual";
  }
  return "";
}

void note(Transcript* tr, int iteration, int member, VarId v, const char* kind, int value, const char* cls = "") {
  if (tr) tr->steps.push_back({iteration, member, v, kind, value, cls});
}

// Appends up to ell+1 y-bits as the values of the block variables.
void take_block(PathRun& run, const std::vector<VarId>& block, const BitStream& y, std::size_t& yc,
                Restriction& pi, const std::function<void(VarId, bool)>& on_assign = {}) {
  run.blocks.push_back(block);
  for (VarId v : block) {
    if (yc >= y.size()) break;
    const bool b = y[yc++] != 0;
    pi = pi.with(v, b);
    run.path.push_back({v, b});
    if (on_assign) on_assign(v, b);
  }
  run.y_used = yc;
}

}  // namespace

nlohmann::json to_json(const Transcript& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) {
    nlohmann::json j{{"iteration", s.iteration}, {"member", s.member}, {"var", s.var.index}, {"kind", s.kind}};
    if (s.value >= 0) j["value"] = s.value;
    if (!s.cls.empty()) j["class"] = s.cls;
    steps.push_back(std::move(j));
  }
  return nlohmann::json{{"steps", std::move(steps)}};
}

DecisionTree PathRun::tree() const {
  DecisionTree::Builder b;
  std::function<std::int32_t(std::size_t, std::size_t)> rec;
  std::function<std::int32_t(std::size_t, std::size_t, std::size_t, bool)> block;
  rec = [&](std::size_t bi, std::size_t off) -> std::int32_t {
    if (bi == blocks.size()) return b.leaf(Label::None);
    return block(bi, off, 0, true);
  };
  block = [&](std::size_t bi, std::size_t off, std::size_t pos, bool on_path) -> std::int32_t {
    const auto& vars = blocks[bi];
    if (pos == vars.size()) return on_path ? rec(bi + 1, off + vars.size()) : b.leaf(Label::None);
    std::int32_t c[2];
    for (int v = 0; v < 2; ++v) {
      const bool stays = on_path && off + pos < path.size() && path[off + pos].value == (v == 1);
      c[v] = block(bi, off, pos + 1, stays);
    }
    return b.node(vars[pos], c[0], c[1]);
  };
  std::int32_t root = rec(0, 0);
  return std::move(b).finish(root);
}

PathRun run_algorithm_A(const DnfFamily& family, const Restriction& rho, const BitStream& x, const BitStream& y,
                        int ell, Transcript* tr) {
  if (ell < 0) throw PreconditionError("ell must be non-negative");
  PathRun run;
  Restriction pi;
  std::size_t xc = 0, yc = 0, i = 0;
  while (i < family.size() && xc < x.size() && yc < y.size()) {
    ++run.iterations;
    const DecisionTree t = build_cdt(restrict_dnf(family[i], pi));
    const std::size_t x0 = xc;
    std::vector<VarId> stars;
    bool halted = false;
    std::int32_t id = t.root();
    while (!t.at(id).is_leaf()) {
      const auto& n = t.at(id);
      if (auto v = rho.get(n.var)) {
        note(tr, run.iterations, static_cast<int>(i), n.var, "fixed", *v);
        id = n.child[*v ? 1 : 0];
        continue;
      }
      stars.push_back(n.var);
      note(tr, run.iterations, static_cast<int>(i), n.var, "star", -1);
      if (static_cast<int>(stars.size()) == ell + 1) break;
      if (xc >= x.size()) {
        halted = true;
        break;
      }
      id = n.child[x[xc++] ? 1 : 0];
      run.x_used = std::max(run.x_used, xc);
    }
    if (halted) break;
    if (static_cast<int>(stars.size()) <= ell) {
      xc = x0;  // as if the bits had never been read
      ++i;
      continue;
    }
    take_block(run, stars, y, yc, pi);
  }
  return run;
}

PathRun run_algorithm_A_tilde(const DnfFamily& family, const BitStream& y, int ell, double p, Rng& rng,
                              Transcript* tr) {
  if (ell < 0) throw PreconditionError("ell must be non-negative");
  PathRun run;
  Restriction pi;
  std::size_t yc = 0, i = 0;
  while (i < family.size() && yc < y.size()) {
    ++run.iterations;
    const DecisionTree t = build_cdt(restrict_dnf(family[i], pi));
    const Branch sigma = sample_walk(t, rng);
    std::vector<VarId> eta;
    for (const auto& a : sigma.steps) {
      const bool keep = rng.coin(p);
      note(tr, run.iterations, static_cast<int>(i), a.var, keep ? "star" : "nonstar", keep ? -1 : a.value);
      if (keep) eta.push_back(a.var);
    }
    if (static_cast<int>(eta.size()) <= ell) {
      ++i;
      continue;
    }
    eta.resize(ell + 1);
    take_block(run, eta, y, yc, pi);
  }
  return run;
}

GoodTreeContext GridGameSetup::context() const {
  if (!atlas) throw PreconditionError("grid game needs an atlas");
  return GoodTreeContext{LiveGraph(atlas->grid()), base_charge(atlas->grid()), k};
}

PathRun run_algorithm_A_grid(const DnfFamily& family, const GridRestriction& rho, const GridGameSetup& setup,
                             const BitStream& x, const BitStream& y, int ell, Transcript* tr) {
  if (ell < 0) throw PreconditionError("ell must be non-negative");
  const GoodTreeContext ctx = setup.context();
  PathRun run;
  Restriction pi;
  std::vector<std::int8_t> known(rho.live_path.size(), -1);  // new-variable values fixed by pi
  std::size_t xc = 0, yc = 0, i = 0;
  while (i < family.size() && xc < x.size() && yc < y.size()) {
    ++run.iterations;
    const DecisionTree t = build_cdt_independent(family[i], ctx, pi);
    const std::size_t x0 = xc;
    std::vector<std::int8_t> local = known;
    std::vector<VarId> stars;
    bool halted = false;
    std::int32_t id = t.root();
    while (!t.at(id).is_leaf()) {
      const auto& n = t.at(id);
      const int it = run.iterations, mem = static_cast<int>(i);
      auto img = apply_grid_restriction(rho, n.var);
      if (const auto* f = std::get_if<Fixed>(&img)) {
        note(tr, it, mem, n.var, "fixed", f->value);
        id = n.child[f->value ? 1 : 0];
        continue;
      }
      const auto& m = std::get<Mapped>(img);
      if (local[m.new_var.index] >= 0) {
        const bool b = (local[m.new_var.index] != 0) != m.negated;
        note(tr, it, mem, n.var, "repeat", b);
        id = n.child[b ? 1 : 0];
        continue;
      }
      stars.push_back(n.var);
      note(tr, it, mem, n.var, "star", -1);
      if (static_cast<int>(stars.size()) == ell + 1) break;
      if (xc >= x.size()) {
        halted = true;
        break;
      }
      const bool b = x[xc++] != 0;
      run.x_used = std::max(run.x_used, xc);
      local[m.new_var.index] = static_cast<std::int8_t>(b != m.negated);
      id = n.child[b ? 1 : 0];
    }
    if (halted) break;
    if (static_cast<int>(stars.size()) <= ell) {
      xc = x0;
      ++i;
      continue;
    }
    take_block(run, stars, y, yc, pi, [&](VarId v, bool b) {
      const Mapped m = std::get<Mapped>(apply_grid_restriction(rho, v));
      known[m.new_var.index] = static_cast<std::int8_t>(b != m.negated);
    });
  }
  return run;
}

GameState::GameState(const PathAtlas& atlas, Approach approach)
    : atlas_(&atlas),
      approach_(approach),
      delta_(atlas.params().delta),
      m_(atlas.params().m()),
      gm_(build_torus(atlas.params().m())),
      gn_(atlas.grid()),
      alpha_(base_charge(atlas.grid())) {
  const std::size_t ne = atlas.grid().graph().num_edges();
  chosen_.assign(atlas.params().subgrid_count(), -1);
  eliminated_.assign(static_cast<std::size_t>(atlas.params().subgrid_count()) * delta_, 0);
  values_.assign(ne, -1);
  star_.assign(ne, 0);
  cls_.assign(ne, -1);
  key_.assign(ne, -1);
  live_key_.assign(gm_.graph().num_edges(), 0);
}

std::optional<StarClass> GameState::star_class(VarId e) const {
  if (!star_[e.index]) return std::nullopt;
  return static_cast<StarClass>(cls_[e.index]);
}

int GameState::open_centers(int subgrid) const {
  if (chosen_[subgrid] >= 0) return 1;
  int r = 0;
  for (int q = 0; q < delta_; ++q) r += eliminated_[subgrid * delta_ + q] ? 0 : 1;
  return r;
}

int GameState::gm_key(int a, int b) const {
  return static_cast<int>(gm_.edge_between(static_cast<Vertex>(a), static_cast<Vertex>(b)).index);
}

void GameState::eliminate(int center) {
  const int s = center / delta_;
  eliminated_[center] = 1;
  if (chosen_[s] >= 0) return;
  int last = -1, open = 0;
  for (int q = 0; q < delta_; ++q) {
    if (!eliminated_[s * delta_ + q]) {
      ++open;
      last = s * delta_ + q;
    }
  }
  if (open == 1) chosen_[s] = last;
  if (open == 0) throw InvariantViolation("every center of subgrid " + std::to_string(s) + " eliminated");
}

bool GameState::choose_or_eliminate(int center, Rng& rng) {
  const int s = center / delta_;
  if (chosen_[s] >= 0) return chosen_[s] == center;
  if (eliminated_[center]) return false;
  const int r = open_centers(s);
  if (rng.coin(1.0 / r)) {
    chosen_[s] = center;
    return true;
  }
  eliminate(center);
  return chosen_[s] == center;
}

void GameState::mark_live(int center, std::vector<int>& residual, int skip_key) {
  const int s = center / delta_;
  const int a = s / m_, b = s % m_;
  const int nbrs[4] = {a * m_ + (b + 1) % m_, a * m_ + (b + m_ - 1) % m_, ((a + 1) % m_) * m_ + b,
                       ((a + m_ - 1) % m_) * m_ + b};
  for (int t : nbrs) {
    const int key = gm_key(s, t);
    if (key == skip_key || live_key_[key] || chosen_[t] < 0) continue;
    // The atlas path between the two chosen centers: its G_m edge is
    // 2 * subgrid_a + dir.
    const int sa = key / 2, dir = key % 2;
    const int ca = sa == s ? center : chosen_[t];
    const int cb = sa == s ? chosen_[t] : center;
    const auto& path = atlas_->paths()[atlas_->path_index(sa, dir, ca % delta_, cb % delta_)];
    live_key_[key] = 1;
    residual.push_back(key);
    for (VarId e : path.edges) {
      if (values_[e.index] >= 0 || star_[e.index]) continue;
      star_[e.index] = 1;
      cls_[e.index] = static_cast<std::int8_t>(StarClass::Residual);
      key_[e.index] = key;
    }
  }
}

Restriction GameState::fixed_restriction() const {
  std::vector<Assignment> a;
  a.reserve(fixed_count_);
  for (std::size_t e = 0; e < values_.size(); ++e) {
    if (values_[e] >= 0) a.push_back({VarId{static_cast<std::uint32_t>(e)}, values_[e] == 1});
  }
  return Restriction(std::move(a));
}

std::vector<Assignment> GameState::fix_bridges() {
  const Restriction fixed = fixed_restriction();
  const Restriction closed = extend_by_bridges(gn_, alpha_, fixed);
  std::vector<Assignment> out;
  if (closed.size() == fixed.size()) return out;
  for (const auto& a : closed.entries()) {
    if (values_[a.var.index] >= 0 || star_[a.var.index]) continue;
    values_[a.var.index] = a.value ? 1 : 0;
    ++fixed_count_;
    out.push_back(a);
  }
  return out;
}

StarDecision GameState::step(VarId e, bool walk_bit, Rng& rng) {
  if (values_.at(e.index) >= 0 || star_[e.index]) throw PreconditionError("sampler: variable already set");
  StarDecision d;
  d.value = walk_bit;
  auto ac = associated_center(*atlas_, e);
  if (ac) {
    const int A = ac->center;
    const int sa = A / delta_;
    const int sb = ac->far.front() / delta_;
    d.open_before = open_centers(sa);
    d.key = gm_key(sa, sb);
    const int chosen_b_before = chosen_[sb];
    const bool a_chosen = choose_or_eliminate(A, rng);
    auto in_far = [&](int c) { return std::binary_search(ac->far.begin(), ac->far.end(), c); };
    if (a_chosen) {
      if (chosen_[sb] >= 0) {
        d.star = in_far(chosen_[sb]);
      } else if (approach_ == Approach::II) {
        d.star = std::any_of(ac->far.begin(), ac->far.end(), [&](int c) { return !eliminated_[c]; });
      } else {
        std::vector<int> in, out;
        for (int q = 0; q < delta_; ++q) {
          const int c = sb * delta_ + q;
          if (eliminated_[c]) continue;
          (in_far(c) ? in : out).push_back(c);
        }
        const double total = static_cast<double>(in.size() + out.size());
        d.star = rng.coin(static_cast<double>(in.size()) / total);
        for (int c : d.star ? out : in) eliminate(c);
      }
    }
    if (d.star) {
      d.cls = d.open_before * 2 >= delta_ ? StarClass::Good : StarClass::Bad;
      star_[e.index] = 1;
      cls_[e.index] = static_cast<std::int8_t>(d.cls);
      key_[e.index] = d.key;
      live_key_[d.key] = 1;
      mark_live(A, d.residual, d.key);
      if (approach_ == Approach::I && chosen_b_before < 0 && chosen_[sb] >= 0) mark_live(chosen_[sb], d.residual, d.key);
      return d;
    }
  }
  values_[e.index] = walk_bit ? 1 : 0;
  ++fixed_count_;
  d.forced = fix_bridges();
  return d;
}

void GameState::check() const {
  for (std::size_t s = 0; s < chosen_.size(); ++s) {
    if (chosen_[s] >= 0 && eliminated_[chosen_[s]]) {
      throw InvariantViolation("chosen center of subgrid " + std::to_string(s) + " is eliminated");
    }
    if (chosen_[s] >= 0 && chosen_[s] / delta_ != static_cast<int>(s)) {
      throw InvariantViolation("chosen center outside its subgrid");
    }
  }
}

PathRun run_algorithm_A_tilde_grid(const DnfFamily& family, const GridGameSetup& setup, const BitStream& y, int ell,
                                   Approach approach, Rng& rng, TildeRecord* record, Transcript* tr) {
  if (ell < 0) throw PreconditionError("ell must be non-negative");
  const GoodTreeContext ctx = setup.context();
  GameState st(*setup.atlas, approach);
  TildeRecord local_record;
  TildeRecord& rec = record ? *record : local_record;
  const int delta = setup.atlas->params().delta;
  PathRun run;
  Restriction pi;
  std::vector<std::uint8_t> keys_in_pi(2 * static_cast<std::size_t>(setup.atlas->params().subgrid_count()), 0);
  std::size_t yc = 0, i = 0;
  const std::size_t max_iterations = family.size() + (y.size() + ell) / (ell + 1);
  while (i < family.size() && yc < y.size()) {
    ++run.iterations;
    if (static_cast<std::size_t>(run.iterations) > max_iterations) {
      throw InvariantViolation("A~ exceeded its iteration budget");
    }
    const int it = run.iterations, mem = static_cast<int>(i);
    const DecisionTree t = build_cdt_independent(family[i], ctx, pi);
    std::vector<std::uint8_t> keys = keys_in_pi;
    std::vector<std::pair<VarId, StarClass>> eta;
    std::int32_t id = t.root();
    auto add_star = [&](VarId e, int key, StarClass cls) {
      if (keys[key]) {
        note(tr, it, mem, e, "repeat", -1);
        return;
      }
      keys[key] = 1;
      eta.emplace_back(e, cls);
      note(tr, it, mem, e, cls == StarClass::Residual ? "residual" : "star", -1, class_name(cls));
    };
    while (!t.at(id).is_leaf()) {
      const auto& n = t.at(id);
      const VarId e = n.var;
      if (st.value(e) >= 0) {
        note(tr, it, mem, e, "fixed", st.value(e));
        id = n.child[st.value(e)];
        continue;
      }
      const bool b = rng.bit() != 0;
      if (st.is_star(e)) {
        add_star(e, st.star_key(e), *st.star_class(e));
      } else {
        StarDecision d = st.step(e, b, rng);
        for (const auto& f : d.forced) note(tr, it, mem, f.var, "forced", f.value);
        if (!d.star) {
          note(tr, it, mem, e, "nonstar", b);
        } else {
          if (d.cls == StarClass::Bad && delta - d.open_before < (delta + 1) / 2) {
            rec.accounting_ok = false;
            rec.diagnostics.push_back("bad star without delta/2 eliminations at edge " + std::to_string(e.index));
          }
          rec.residual_created += static_cast<int>(d.residual.size());
          rec.max_residual_per_star = std::max(rec.max_residual_per_star, static_cast<int>(d.residual.size()));
          if (static_cast<int>(d.residual.size()) > st.residual_cap()) {
            rec.accounting_ok = false;
            rec.diagnostics.push_back("too many residual stars at edge " + std::to_string(e.index));
          }
          add_star(e, d.key, d.cls);
        }
      }
      if (static_cast<int>(eta.size()) == ell + 1) break;
      id = n.child[b ? 1 : 0];
    }
    for (const auto& [e, c] : eta) {
      (void)e;
      if (c == StarClass::Good) ++rec.good;
      if (c == StarClass::Bad) ++rec.bad;
      if (c == StarClass::Residual) ++rec.residual;
    }
    rec.etas.push_back(eta);
    if (static_cast<int>(eta.size()) <= ell) {
      ++i;
      continue;
    }
    std::vector<VarId> block;
    for (const auto& [e, c] : eta) {
      (void)c;
      block.push_back(e);
    }
    take_block(run, block, y, yc, pi, [&](VarId v, bool) { keys_in_pi[st.star_key(v)] = 1; });
  }
  st.check();
  return run;
}

DominanceVerdict dominance_test(const std::vector<int>& a, const std::vector<int>& b, double alpha,
                                std::size_t min_samples) {
  if (a.size() < min_samples || b.size() < min_samples) throw PreconditionError("dominance_test: sample too small");
  if (!(alpha > 0 && alpha < 1)) throw PreconditionError("dominance_test: alpha must lie in (0,1)");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  DominanceVerdict v;
  v.band = std::sqrt(-std::log(alpha) / 2.0 * (na + nb) / (na * nb));
  const int top = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  const int low = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  auto survival = [](const std::vector<int>& s, int t) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [t](int x) { return x >= t; })) / s.size();
  };
  v.max_violation = -1;
  for (int t = low; t <= top + 1; ++t) {
    const double diff = survival(a, t) - survival(b, t);
    if (diff > v.max_violation) {
      v.max_violation = diff;
      v.worst_t = t;
    }
  }
  v.pass = v.max_violation <= v.band;
  return v;
}

}  // namespace switchlab
