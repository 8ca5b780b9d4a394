#include <cmath>
#include <sstream>

#include "doctest.h"
#include "switchlab/error.hpp"
#include "switchlab/lab.hpp"

using namespace switchlab;
using doctest::Approx;

namespace {

VarId v(std::uint32_t i) { return VarId{i}; }

ExperimentConfig small(const std::string& kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.trials = 2000;
  c.seed = 17;
  return c;
}

std::string csv(const ExperimentResult& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

std::string json(const ExperimentResult& r) {
  std::ostringstream os;
  write_json(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("Clopper-Pearson upper limit") {
  for (std::uint64_t n : {1ull, 10ull, 1000ull}) {
    CHECK(estimate_failure(n, 0, 0.999) == Approx(1.0 - std::pow(0.001, 1.0 / static_cast<double>(n))));
    CHECK(estimate_failure(n, n, 0.999) == 1.0);
  }
  double prev = 0;
  for (std::uint64_t f = 0; f <= 50; ++f) {
    const double u = estimate_failure(50, f, 0.99);
    CHECK(u > prev);
    CHECK(u >= static_cast<double>(f) / 50);
    prev = u;
  }
  // Defining property: Pr[Bin(N, u) <= f] = 1 - level.
  const std::uint64_t n = 40, f = 3;
  const double u = estimate_failure(n, f, 0.95);
  double cdf = 0, term = std::pow(1 - u, static_cast<double>(n));
  for (std::uint64_t i = 0; i <= f; ++i) {
    cdf += term;
    term *= static_cast<double>(n - i) / static_cast<double>(i + 1) * u / (1 - u);
  }
  CHECK(cdf == Approx(0.05).epsilon(1e-6));
  CHECK_THROWS_AS(estimate_failure(3, 4, 0.9), PreconditionError);
}

TEST_CASE("tree enumeration counts") {
  std::vector<VarId> vars{v(0), v(1), v(2)};
  for (int d = 0; d <= 3; ++d) {
    for (bool labeled : {false, true}) {
      std::uint64_t seen = 0;
      bool proper = true;
      for_each_tree(vars, d, labeled, [&](const DecisionTree& t) {
        ++seen;
        proper = proper && t.is_proper() && t.depth() <= d;
      });
      CHECK(seen == count_trees(3, d, labeled));
      CHECK(proper);
    }
  }
  // Hand counts: 1 + 2 * 1 = 3 unlabeled trees of depth <= 1 over two variables.
  CHECK(count_trees(2, 1, false) == 3);
  CHECK(count_trees(1, 1, true) == 6);
  CHECK(count_trees(4, 4, false) == 238145);
  CHECK(count_trees(4, 3, true) == 364818);
}

TEST_CASE("lemma 5.7 ways on small trees") {
  const Rational half(Rational(1) / 2);
  DecisionTree one = DecisionTree::node(v(0), DecisionTree(), DecisionTree());
  auto w1 = way_one_distribution(one, 1, half);
  auto w2 = way_two_distribution(one, half);
  CHECK(w1[1] == half);
  CHECK(w2[1] == half);
  CHECK(w1 == w2);
  // An unused variable does not change way one.
  CHECK(way_one_distribution(one, 3, half) == w1);

  DecisionTree t = DecisionTree::node(v(1), one, DecisionTree::node(v(2), DecisionTree(), DecisionTree()));
  const Rational q(Rational(1) / 4);
  CHECK(way_one_distribution(t, 3, q) == way_two_distribution(t, q));
  // Pr[|pi| = 2] = p^2 on the full tree of depth 2.
  CHECK(way_two_distribution(t, q)[2] == q * q);
}

TEST_CASE("exact equivalence on small universes") {
  for (auto [num, den] : {std::pair{1, 2}, std::pair{1, 4}, std::pair{2, 3}, std::pair{0, 1}, std::pair{1, 1}}) {
    auto rep = exact_equivalence(3, 3, num, den);
    CHECK(rep.trees == count_trees(3, 3, false));
    CHECK(rep.mismatches == 0);
  }
  CHECK_THROWS_AS(exact_equivalence(3, 4, 1, 2), PreconditionError);
}

TEST_CASE("parity correlation") {
  std::vector<VarId> one{v(0)};
  CHECK(correlation_with_parity(DecisionTree::leaf(true), one) == 0);
  DecisionTree x0 = DecisionTree::node(v(0), DecisionTree::leaf(false), DecisionTree::leaf(true));
  CHECK(correlation_with_parity(x0, one) == 1);
  CHECK(correlation_with_parity(complement_tree(x0), one) == -1);
  std::vector<VarId> two{v(0), v(1)};
  CHECK(correlation_with_parity(x0, two) == 0);
  DecisionTree xor2 = DecisionTree::node(v(0), DecisionTree::node(v(1), DecisionTree::leaf(false), DecisionTree::leaf(true)),
                                         DecisionTree::node(v(1), DecisionTree::leaf(true), DecisionTree::leaf(false)));
  CHECK(correlation_with_parity(xor2, two) == 1);
  CHECK_THROWS_AS(correlation_with_parity(x0, std::vector<VarId>{v(1)}), PreconditionError);
  CHECK_THROWS_AS(correlation_with_parity(DecisionTree(), one), PreconditionError);

  // Every tree of depth < 3 over three variables.
  std::vector<VarId> three{v(0), v(1), v(2)};
  bool zero = true;
  for_each_tree(three, 2, true, [&](const DecisionTree& t) { zero = zero && correlation_with_parity(t, three) == 0; });
  CHECK(zero);
}

TEST_CASE("config validation and json") {
  ExperimentConfig c = small("single-sl");
  CHECK(c.validate().empty());
  ExperimentConfig bad = c;
  bad.p = 2;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = c;
  bad.kind = "nope";
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = c;
  bad.trials = 2000000;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad.allow_large = true;
  CHECK(bad.validate().size() == 1);
  bad = small("grid-sl");
  bad.n = 50;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);

  nlohmann::json j = c;
  ExperimentConfig back;
  j.get_to(back);
  CHECK(nlohmann::json(back) == j);
  // Partial documents keep defaults.
  ExperimentConfig partial;
  nlohmann::json{{"kind", "tails"}, {"trials", 5}}.get_to(partial);
  CHECK(partial.kind == "tails");
  CHECK(partial.trials == 5);
  CHECK(partial.k == ExperimentConfig{}.k);
}

TEST_CASE("single switching lemma runner") {
  ExperimentConfig c = small("single-sl");
  c.p = 0;
  auto r = run_single_sl(c);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.failures == 0);
    CHECK(row.pass);
  }
  c.p = 1;
  c.trials = 200;
  r = run_single_sl(c);
  // Six 2-term clauses over 20 variables: the CDT has depth >= 2 always.
  CHECK(r.rows[0].failures == 200);
  CHECK(r.rows[0].vacuous);
  CHECK(r.pass());
}

TEST_CASE("multi switching lemma runner") {
  ExperimentConfig c = small("multi-sl");
  c.p = 1.0 / 64;
  c.ts = {3, 6};
  auto r = run_multi_sl_uniform(c);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].failures >= r.rows[1].failures);
  for (const auto& row : r.rows) CHECK(row.failures <= row.trials);
  c.s = 1;
  c.p = 1;
  c.trials = 100;
  c.ts = {1, 3};
  r = run_multi_sl_uniform(c);
  // With one member and nothing fixed the first block of ell+1 queries is always taken.
  CHECK(r.rows[0].failures == 100);
  CHECK(r.rows[1].failures == 100);
}

TEST_CASE("runs are thread independent") {
  for (const char* kind : {"single-sl", "multi-sl", "tails"}) {
    ExperimentConfig c = small(kind);
    c.threads = 1;
    auto a = run_experiment(c);
    c.threads = 4;
    auto b = run_experiment(c);
    CHECK(csv(a) == csv(b));
    CHECK(json(a) == json(b));
    c.seed = 18;
    CHECK(csv(run_experiment(c)) != csv(a));
  }
}

TEST_CASE("grid runner") {
  ExperimentConfig c = small("grid-sl");
  c.trials = 60;
  c.ell = 1;
  c.ts = {1, 2};
  c.threads = 1;
  auto a = run_grid_sl(c);
  c.threads = 3;
  auto b = run_grid_sl(c);
  CHECK(csv(a) == csv(b));
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].vacuous);
  CHECK(a.pass());
  CHECK_FALSE(a.notes.empty());
}

TEST_CASE("tails runner") {
  ExperimentConfig c = small("tails");
  c.trials = 20000;
  auto r = run_tails(c);
  REQUIRE(r.rows.size() == 14);
  // E[X] = s/q for the negative binomial.
  CHECK(r.rows[0].estimate == Approx(2.0).epsilon(0.05));
  CHECK(r.rows[3].estimate == Approx(4.0).epsilon(0.05));
  for (std::size_t i = 0; i + 1 < r.rows.size(); ++i) CHECK(r.rows[i].pass);
  // 2*10^4 trials cannot resolve a 1.3e-5 bound even with no exceedances.
  CHECK(r.rows.back().failures == 0);
  CHECK_FALSE(r.rows.back().pass);
}

TEST_CASE("worker exceptions propagate") {
  using Acc = int;
  auto body = [](std::uint64_t i, Acc&) {
    if (i == 77) throw PreconditionError("boom");
  };
  auto merge = [](Acc& a, const Acc& b) { a += b; };
  CHECK_THROWS_AS(parallel_accumulate<Acc>(500, 4, body, merge, 0), PreconditionError);
  CHECK_THROWS_AS(parallel_accumulate<Acc>(500, 1, body, merge, 0), PreconditionError);
}

TEST_CASE("csv and json layout") {
  ExperimentConfig c = small("single-sl");
  c.trials = 50;
  auto r = run_single_sl(c);
  std::istringstream is(csv(r));
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 1 + static_cast<int>(r.rows.size()));
  auto j = nlohmann::json::parse(json(r));
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["config"]["seed"] == 17);
  CHECK_FALSE(j["config"].contains("threads"));
  CHECK(j["rows"].size() == r.rows.size());
}
