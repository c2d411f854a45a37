#pragma once

#include <cstdint>
#include <cmath>

#include "dcnet/projective.hpp"

namespace dcnet {

/// Counter-based SplitMix64 stream. Identical (seed, stream, counter) triples
/// produce identical values on every platform, which is what makes `verify`
/// reports byte-reproducible. Derived streams are cheap: child(tag) never
/// perturbs the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  Rng child(std::uint64_t tag) { return Rng(next_u64(), tag); }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller normal deviate.
  double normal() {
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec normal_vec(int size) {
    Vec v(size);
    for (int i = 0; i < size; ++i) v[i] = normal();
    return v;
  }

  /// Unit vector in R^size.
  Vec unit_vec(int size) {
    Vec v = normal_vec(size);
    while (v.norm() < 1e-8) v = normal_vec(size);
    return v / v.norm();
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

}  // namespace dcnet
