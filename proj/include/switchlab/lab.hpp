#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "switchlab/boolcore.hpp"
#include "switchlab/bounds.hpp"
#include "switchlab/game.hpp"

namespace switchlab {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
  std::string kind;  // single-sl, multi-sl, grid-sl, equiv-suite, tails
  int n = 48;        // grid side (grid experiments)
  int delta = 2;
  double p = 1.0 / 32;
  int k = 2;
  int ell = 2;
  int s = 4;         // family size
  int terms = 6;     // terms per DNF
  int vars = 20;     // variables of the uniform experiments
  std::vector<int> ts{2, 3, 4};
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  int threads = 0;   // 0: SWITCHLAB_THREADS or hardware concurrency
  double level = 0.999;
  std::string edge_pool = "paths";  // grid families: "paths" or "all"
  int depth_bound = 32;             // k of the good-tree contexts
  bool allow_large = false;         // lift the desk-scale caps

  // Throws PreconditionError; returns warnings for soft caps.
  std::vector<std::string> validate() const;
};

// Standard parameters of each experiment kind.
ExperimentConfig default_config(const std::string& kind);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct ResultRow {
  std::string label;
  int t = 0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double estimate = 0;     // failure rate, or the statistic named in label
  double upper = 0;        // Clopper-Pearson upper limit (probabilities)
  double bound_log = 0;    // ln of the analytic bound
  bool vacuous = false;
  bool pass = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<std::string> notes;
  bool pass() const;
};

nlohmann::json to_json(const ExperimentResult& r);
void write_csv(std::ostream& os, const ExperimentResult& r);
void write_json(std::ostream& os, const ExperimentResult& r);

int resolve_threads(int requested);

// Runs body(i, acc) for i in [0, n) on a pool; accumulators are merged with
// merge. Results are independent of the thread count when merge is
// associative and commutative.
template <typename Acc>
Acc parallel_accumulate(std::uint64_t n, int threads, const std::function<void(std::uint64_t, Acc&)>& body,
                        const std::function<void(Acc&, const Acc&)>& merge, Acc init);

// Per-trial streams.
enum class Stream : std::uint64_t { Family = 1, Restriction = 2, Walk = 3, SideA = 4, SideB = 5, Tails = 6 };
Rng trial_rng(std::uint64_t seed, Stream stream, std::uint64_t index);

// One-sided Clopper-Pearson upper limit.
double estimate_failure(std::uint64_t trials, std::uint64_t failures, double level);

ExperimentResult run_single_sl(const ExperimentConfig& cfg);
ExperimentResult run_multi_sl_uniform(const ExperimentConfig& cfg);
ExperimentResult run_grid_sl(const ExperimentConfig& cfg);
ExperimentResult run_tails(const ExperimentConfig& cfg);
ExperimentResult run_equivalence_suite(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Exact comparison of the two sampling ways on every proper tree of depth
// <= max_depth over num_vars variables, p = num/den.
struct EquivalenceReport {
  std::uint64_t trees = 0;
  std::uint64_t mismatches = 0;
  std::vector<std::string> examples;  // first few mismatching trees
};
EquivalenceReport exact_equivalence(int num_vars, int max_depth, int p_num, int p_den);

// Exact distribution of |pi| (index = length) for the two ways on one tree.
std::vector<Rational> way_one_distribution(const DecisionTree& t, int num_vars, const Rational& p);
std::vector<Rational> way_two_distribution(const DecisionTree& t, const Rational& p);

struct DominanceRun {
  std::vector<int> a;  // |pi| under A with rho ~ grid restriction
  std::vector<int> b;  // |pi| under A~ with the sampler
  DominanceVerdict verdict;
  TildeRecord totals;
};
DominanceRun grid_dominance(const ExperimentConfig& cfg, double alpha);

// Proper trees (no variable repeated on a branch) of depth <= depth.
// Leaves are unlabeled, or take both labels when labeled is set.
void for_each_tree(const std::vector<VarId>& vars, int depth, bool labeled,
                   const std::function<void(const DecisionTree&)>& fn);
std::uint64_t count_trees(int num_vars, int depth, bool labeled);

// Pr[T = parity] - Pr[T != parity] over uniform inputs to vars.
Rational correlation_with_parity(const DecisionTree& t, const std::vector<VarId>& vars);

// Random family of s k-DNFs over the edges of G_n.
DnfFamily random_grid_family(const PathAtlas& atlas, int s, int k, int terms, bool path_edges_only, Rng& rng);

}  // namespace switchlab

#include "switchlab/lab_impl.hpp"
