#pragma once

#include <cmath>
#include <cstdint>

#include "nfisac/types.hpp"

namespace nfisac {

/// Deterministic PRNG (splitmix64 core). Identical streams for identical
/// seeds regardless of standard-library implementation, which keeps the
/// harness outputs reproducible byte for byte.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Circularly symmetric complex normal with E|z|^2 = 1.
  cplx cnormal() {
    const double s = std::sqrt(0.5);
    return {s * normal(), s * normal()};
  }

  VecC cnormal_vector(int n) {
    VecC v(n);
    for (int i = 0; i < n; ++i) v(i) = cnormal();
    return v;
  }

  /// Derive an independent child stream, e.g. per trial.
  static uint64_t mix(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    Rng r(seed ^ (a * 0xD1342543DE82EF95ULL) ^ (b * 0xA0761D6478BD642FULL) ^
          (c * 0xE7037ED1A0B428DBULL));
    return r.next_u64();
  }

 private:
  uint64_t state_;
};

}  // namespace nfisac
