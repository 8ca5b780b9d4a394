#include "switchlab/bounds.hpp"

#include <cmath>
#include <limits>

#include "switchlab/error.hpp"

namespace switchlab {

namespace {

const double kLn2 = std::log(2.0);

double safe_log(double x) { return x <= 0 ? -std::numeric_limits<double>::infinity() : std::log(x); }

void need(bool ok, const char* what) {
  if (!ok) throw PreconditionError(what);
}

double ceil_div(int a, int b) { return static_cast<double>((a + b - 1) / b); }

}  // namespace

double LogProb::linear() const { return value >= 0 ? 1.0 : std::exp(value); }
double LogProb::raw() const { return std::exp(value); }
LogProb LogProb::from_linear(double x) { return {safe_log(x)}; }

LogProb bound_single_sl(double p, int k, int t) {
  need(p >= 0 && p <= 1 && k >= 1 && t >= 1, "bound_single_sl: need p in [0,1], k >= 1, t >= 1");
  return {t * (kLn2 + safe_log(p) + std::log(static_cast<double>(k)) + k * kLn2)};
}

LogProb bound_path_tail(double p, int k, int t, int m) {
  need(p >= 0 && p <= 1 && k >= 1 && t >= 1 && m >= 1 && m <= t, "bound_path_tail: need 1 <= m <= t");
  const double base = safe_log(p) + std::log(static_cast<double>(k));
  if (m == 1) return {t * (base + k * kLn2)};
  return {t * (std::log(30.0) + base + 2 * k * kLn2)};
}

LogProb bound_multi_uniform(int s, int ell, double p, int k, int t) {
  need(s >= 1 && ell >= 1 && p >= 0 && p <= 1 && k >= 1 && t >= 1, "bound_multi_uniform: bad parameters");
  return {ceil_div(t, ell) * std::log(static_cast<double>(s)) +
          t * (std::log(8.0) + safe_log(p) + std::log(static_cast<double>(k)) + k * kLn2)};
}

GridBound bound_grid_msl(int s, int ell, int k, int delta, int t) {
  need(s >= 1 && ell >= 1 && ell <= k && delta >= 1 && t >= 1, "bound_grid_msl: need 1 <= ell <= k");
  GridBound g;
  g.factor = {std::log(305.0) + std::log(static_cast<double>(k)) + 2 * k * kLn2 - std::log(static_cast<double>(delta))};
  g.per_subfamily = g.factor.pow(t / 8.0);
  g.total = {ceil_div(t, ell) * std::log(static_cast<double>(s)) + g.per_subfamily.value};
  return g;
}

double log_bound_negbin_moment(double q, int s, int t) {
  need(q > 0 && q <= 0.5 && s >= 1 && t >= 1, "log_bound_negbin_moment: need 0 < q <= 1/2");
  return s * std::log(10.0 * t / (s * q)) + t * std::log(t / q);
}

LogProb bound_geo_sum(double p, int n, double d) {
  need(p > 0 && p <= 1 && n >= 1 && d > 1, "bound_geo_sum: need d > 1");
  return {-d * n * (1 - 1 / d) * (1 - 1 / d) / 2};
}

LogProb bound_geo_sum_simple(int n, double d) {
  need(n >= 1 && d >= 2, "bound_geo_sum_simple: need d >= 2");
  return {-d * n / 8};
}

}  // namespace switchlab
