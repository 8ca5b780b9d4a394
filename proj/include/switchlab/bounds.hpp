#pragma once

namespace switchlab {

// Natural log of a bound. Values >= 0 are vacuous as probabilities.
struct LogProb {
  double value = 0;

  double linear() const;  // clamped to [0, 1]
  double raw() const;     // exp(value), unclamped
  bool vacuous() const { return value >= 0; }

  LogProb operator*(LogProb o) const { return {value + o.value}; }
  LogProb pow(double e) const { return {value * e}; }
  static LogProb from_linear(double x);
};

// (2pk2^k)^t
LogProb bound_single_sl(double p, int k, int t);
// (pk2^k)^t if m = 1, else (30pk2^{2k})^t
LogProb bound_path_tail(double p, int k, int t, int m);
// s^ceil(t/ell) (8pk2^k)^t
LogProb bound_multi_uniform(int s, int ell, double p, int k, int t);

struct GridBound {
  LogProb total;          // s^ceil(t/ell) (305k2^{2k}/Delta)^{t/8}
  LogProb per_subfamily;  // (305k2^{2k}/Delta)^{t/8}
  LogProb factor;         // 305k2^{2k}/Delta
};
GridBound bound_grid_msl(int s, int ell, int k, int delta, int t);

// ln of (10t/(sq))^s (t/q)^t, the bound on E[X^t] for X the number of
// Bernoulli(q) trials up to and including the s-th success.
double log_bound_negbin_moment(double q, int s, int t);

// exp(-dn(1-1/d)^2/2) on Pr[sum of n Geo(p) >= dn/p].
LogProb bound_geo_sum(double p, int n, double d);
// exp(-dn/8), valid for d >= 2.
LogProb bound_geo_sum_simple(int n, double d);

}  // namespace switchlab
