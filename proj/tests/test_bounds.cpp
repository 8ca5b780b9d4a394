#include <cmath>
#include <random>

#include "doctest.h"
#include "switchlab/bounds.hpp"
#include "switchlab/error.hpp"
#include "switchlab/rng.hpp"

using namespace switchlab;
using doctest::Approx;

TEST_CASE("single switching lemma bound") {
  CHECK(bound_single_sl(1.0 / 16, 2, 3).raw() == Approx(1.0));
  CHECK(bound_single_sl(1.0 / 16, 2, 3).vacuous());
  CHECK(bound_single_sl(1.0 / 32, 2, 3).raw() == Approx(1.0 / 8));
  CHECK_FALSE(bound_single_sl(1.0 / 32, 2, 3).vacuous());
  CHECK(bound_single_sl(0.0, 2, 3).linear() == 0.0);
  double prev = -1e300;
  for (double p = 0.01; p < 1; p += 0.05) {
    const double v = bound_single_sl(p, 3, 4).value;
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(bound_single_sl(1.5, 2, 3), PreconditionError);
  CHECK_THROWS_AS(bound_single_sl(0.5, 0, 3), PreconditionError);
  // No overflow at the extremes.
  CHECK(std::isfinite(bound_single_sl(0.5, 64, 1000000).value));
}

TEST_CASE("path tail bound") {
  CHECK(bound_path_tail(1.0 / 8, 1, 2, 1).raw() == Approx(1.0 / 16));
  // p k 2^{2k} = 1/60
  const double p = 1.0 / (60.0 * 2 * 16);
  CHECK(bound_path_tail(p, 2, 2, 2).raw() == Approx(0.25));
  for (int k = 1; k < 6; ++k) CHECK(bound_path_tail(0.01, k, 3, 1).value <= bound_path_tail(0.01, k, 3, 2).value);
  CHECK_THROWS_AS(bound_path_tail(0.1, 2, 2, 3), PreconditionError);
}

TEST_CASE("multi switching lemma bound") {
  CHECK(bound_multi_uniform(1, 2, 0.01, 2, 3).raw() == Approx(std::pow(8 * 0.01 * 2 * 4, 3)));
  CHECK(bound_multi_uniform(5, 3, 0.01, 2, 3).raw() == Approx(5 * std::pow(8 * 0.01 * 2 * 4, 3)));
  for (int t = 1; t < 8; ++t) {
    const double ratio = bound_multi_uniform(8, 2, 0.001, 2, t).raw() / bound_multi_uniform(4, 2, 0.001, 2, t).raw();
    CHECK(ratio == Approx(std::pow(2.0, (t + 1) / 2)));
  }
  // The acceptance parameters give 8pk2^k = 1.
  CHECK(bound_multi_uniform(4, 2, 1.0 / 64, 2, 3).vacuous());
}

TEST_CASE("grid multi switching lemma bound") {
  CHECK(bound_grid_msl(1, 1, 2, 305 * 2 * 16, 8).per_subfamily.raw() == Approx(1.0));
  CHECK(bound_grid_msl(1, 2, 2, 9760, 8).total.raw() == Approx(1.0));
  CHECK(bound_grid_msl(3, 1, 1, 2, 8).factor.vacuous());
  double prev = 1e300;
  for (int d = 2; d < 5000; d *= 2) {
    const double v = bound_grid_msl(2, 1, 2, d, 8).total.value;
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(bound_grid_msl(1, 3, 2, 2, 8), PreconditionError);
}

TEST_CASE("negative binomial moment bound") {
  CHECK(std::exp(log_bound_negbin_moment(0.5, 1, 1)) == Approx(40.0));
  // E[X] = s/q = 2 for q = 1/2, s = 1.
  CHECK(2.0 <= std::exp(log_bound_negbin_moment(0.5, 1, 1)));
  CHECK_THROWS_AS(log_bound_negbin_moment(0.6, 1, 1), PreconditionError);
  // Monte Carlo at modest N; the acceptance run uses 10^6.
  Rng rng(6);
  for (double q : {0.5, 0.25}) {
    for (int s : {1, 2}) {
      std::geometric_distribution<int> failures(q);
      double m[4] = {0, 0, 0, 0};
      const int n = 100000;
      for (int i = 0; i < n; ++i) {
        double x = 0;
        for (int j = 0; j < s; ++j) x += failures(rng) + 1;
        for (int t = 1; t <= 3; ++t) m[t] += std::pow(x, t) / n;
      }
      for (int t = 1; t <= 3; ++t) CHECK(std::log(m[t]) <= log_bound_negbin_moment(q, s, t));
    }
  }
}

TEST_CASE("geometric sum concentration") {
  CHECK(bound_geo_sum(0.5, 10, 2).raw() == Approx(std::exp(-10.0 / 4)));
  CHECK(bound_geo_sum_simple(10, 2).raw() == Approx(std::exp(-10.0 / 4)));
  for (double d : {2.0, 3.0, 8.0}) CHECK(bound_geo_sum(0.3, 7, d).value <= bound_geo_sum_simple(7, d).value);
  CHECK_THROWS_AS(bound_geo_sum(0.5, 10, 1.0), PreconditionError);
  CHECK_THROWS_AS(bound_geo_sum_simple(10, 1.5), PreconditionError);
  Rng rng(9);
  std::geometric_distribution<int> failures(0.5);
  long hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    long x = 0;
    for (int j = 0; j < 10; ++j) x += failures(rng) + 1;
    hits += x >= 40 ? 1 : 0;
  }
  CHECK(static_cast<double>(hits) / n <= bound_geo_sum(0.5, 10, 2).linear());
}
