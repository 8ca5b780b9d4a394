#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "switchlab/canonical.hpp"
#include "switchlab/restrictions.hpp"
#include "switchlab/rng.hpp"

namespace switchlab {

using BitStream = std::vector<std::uint8_t>;

enum class StarClass : std::uint8_t { Good, Bad, Residual };

struct TranscriptStep {
  int iteration = 0;
  int member = 0;
  VarId var;
  std::string kind;  // fixed, star, nonstar, repeat, forced, residual
  int value = -1;    // -1 for stars
  std::string cls;   // star class, empty otherwise
};

struct Transcript {
  std::vector<TranscriptStep> steps;
};

nlohmann::json to_json(const Transcript& t);

// Output of one run of A or A~.
struct PathRun {
  std::vector<std::vector<VarId>> blocks;  // variables of each attached exhaustive tree
  std::vector<Assignment> path;            // pi
  int iterations = 0;
  std::size_t x_used = 0;  // high-water mark of the x cursor
  std::size_t y_used = 0;

  // T with unlabeled leaves: the exhaustive trees hung along pi.
  DecisionTree tree() const;
};

// Algorithm A with the standard restriction. Variables unassigned by rho are
// stars. The (ell+1)-th star of a traversal ends it before a bit of x is
// read, so a full run reads at most ell bits of x per block.
PathRun run_algorithm_A(const DnfFamily& family, const Restriction& rho, const BitStream& x, const BitStream& y,
                        int ell, Transcript* transcript = nullptr);

// A~ with the standard restriction: sigma ~ W(T), each variable kept
// independently with probability p.
PathRun run_algorithm_A_tilde(const DnfFamily& family, const BitStream& y, int ell, double p, Rng& rng,
                              Transcript* transcript = nullptr);

// Grid setting. Trees are independent CDTs on G_n with its base charge and
// depth bound k; stars on one atlas path count once.
struct GridGameSetup {
  const PathAtlas* atlas = nullptr;
  int k = 32;
  GoodTreeContext context() const;
};

PathRun run_algorithm_A_grid(const DnfFamily& family, const GridRestriction& rho, const GridGameSetup& setup,
                             const BitStream& x, const BitStream& y, int ell, Transcript* transcript = nullptr);

enum class Approach { I, II };

struct StarDecision {
  bool star = false;
  bool value = false;          // non-stars only
  StarClass cls = StarClass::Good;
  int open_before = 0;         // uneliminated centers in A's subgrid before the step
  int key = -1;                // G_m edge of the star (A's subgrid to S_e's subgrid)
  std::vector<int> residual;   // G_m edges made live as residual stars
  std::vector<Assignment> forced;
};

class GameState {
 public:
  GameState(const PathAtlas& atlas, Approach approach);

  const PathAtlas& atlas() const { return *atlas_; }
  Approach approach() const { return approach_; }
  int residual_cap() const { return approach_ == Approach::I ? 6 : 3; }

  // -1 unset, 0/1 fixed.
  int value(VarId e) const { return values_[e.index]; }
  bool is_star(VarId e) const { return star_[e.index] != 0; }
  std::optional<StarClass> star_class(VarId e) const;
  int star_key(VarId e) const { return key_[e.index]; }
  int chosen(int subgrid) const { return chosen_[subgrid]; }
  bool eliminated(int center) const { return eliminated_[center] != 0; }
  int open_centers(int subgrid) const;
  std::size_t num_fixed() const { return fixed_count_; }

  // One round of the sampling game. walk_bit is the value a non-star takes.
  // Throws PreconditionError if e is set or is a bridge of G_n - fixed.
  StarDecision step(VarId e, bool walk_bit, Rng& rng);

  // Checks the structural invariants; throws InvariantViolation.
  void check() const;

 private:
  bool choose_or_eliminate(int center, Rng& rng);
  void eliminate(int center);
  void mark_live(int center, std::vector<int>& residual, int skip_key);
  std::vector<Assignment> fix_bridges();
  Restriction fixed_restriction() const;
  int gm_key(int subgrid_a, int subgrid_b) const;

  const PathAtlas* atlas_;
  Approach approach_;
  int delta_;
  int m_;
  TorusGrid gm_;
  LiveGraph gn_;
  Charge alpha_;
  std::vector<int> chosen_;
  std::vector<std::uint8_t> eliminated_;
  EdgeValues values_;
  std::vector<std::uint8_t> star_;
  std::vector<std::int8_t> cls_;
  std::vector<int> key_;
  std::vector<std::uint8_t> live_key_;
  std::size_t fixed_count_ = 0;
};

struct TildeRecord {
  std::vector<std::vector<std::pair<VarId, StarClass>>> etas;  // per iteration
  int good = 0;
  int bad = 0;
  int residual = 0;            // residual stars met in some eta
  int residual_created = 0;    // G_m edges made live as residual stars
  int max_residual_per_star = 0;
  bool accounting_ok = true;   // |eta_res| <= C (|eta_good| + |eta_bad|), bad-star eliminations
  std::vector<std::string> diagnostics;
};

PathRun run_algorithm_A_tilde_grid(const DnfFamily& family, const GridGameSetup& setup, const BitStream& y, int ell,
                                   Approach approach, Rng& rng, TildeRecord* record = nullptr,
                                   Transcript* transcript = nullptr);

struct DominanceVerdict {
  bool pass = true;
  double band = 0;           // simultaneous one-sided band
  double max_violation = 0;  // max_t S_A(t) - S_B(t)
  int worst_t = -1;
};

// B dominates A when Pr[B >= t] >= Pr[A >= t] for every t. FAIL iff the
// empirical survival of A exceeds B's by more than the DKW-style band at
// level alpha somewhere.
DominanceVerdict dominance_test(const std::vector<int>& samples_a, const std::vector<int>& samples_b, double alpha,
                                std::size_t min_samples = 10000);

}  // namespace switchlab
