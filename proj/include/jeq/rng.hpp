#pragma once

#include <cmath>
#include <cstdint>

namespace jeq {

// splitmix64; self-contained so streams are bit-identical across standard
// libraries (std::uniform_real_distribution is implementation-defined).
class rng {
 public:
  explicit rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // log-uniform over [a, b], a, b > 0
  double log_uniform(double a, double b) {
    return std::exp(uniform(std::log(a), std::log(b)));
  }

  double normal() {
    // Box-Muller, one value per call kept for determinism
    double u1 = uniform01(), u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  int uniform_int(int lo, int hi) {  // inclusive
    return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace jeq
