#pragma once

#include <cstdint>
#include <random>

namespace switchlab {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic generator. All derived quantities (bits, coins, bounded
// integers) are computed from raw 64-bit outputs so streams are portable
// across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  // Counter-based derivation: stream `index` of family `stream` under
  // `master`. Independent of how trials are scheduled.
  static Rng derive(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return Rng(splitmix64(master ^ splitmix64(stream * 0xd1b54a32d192ed03ULL ^ splitmix64(index))));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return eng_(); }

  bool bit() { return (eng_() >> 63) != 0; }

  // True with probability p (p clamped to [0,1]); 53-bit resolution.
  bool coin(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53 < p;
  }

  // Uniform in [0, n); n > 0. Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return r % n;
  }

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace switchlab
