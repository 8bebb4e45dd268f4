#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace exmart {

/// Deterministic pseudo-random stream. All distribution transforms are
/// implemented here (not via std:: distributions, whose output is
/// implementation-defined), so a seed reproduces identical draws on any
/// platform. Substreams derived from (seed, streamId, substreamId) are
/// independent, which keeps parallel detectors and replicas
/// schedule-independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  static Rng derive(std::uint64_t seed, std::uint64_t streamId, std::uint64_t substreamId = 0) {
    return Rng(deriveSeed(seed, streamId, substreamId));
  }

  /// Mixes (seed, streamId, substreamId) into a single well-spread seed.
  static std::uint64_t deriveSeed(std::uint64_t seed, std::uint64_t streamId,
                                  std::uint64_t substreamId = 0) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ (streamId + 0x9e3779b97f4a7c15ULL));
    h = mix(h ^ (substreamId + 0xbf58476d1ce4e5b9ULL));
    return h;
  }

  std::uint64_t raw() { return engine_(); }

  /// Uniform draw strictly inside (0, 1).
  double uniform() {
    return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // rejection from a power-of-two envelope keeps the draw unbiased
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t v;
    do {
      v = raw() & mask;
    } while (v >= n);
    return v;
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (haveSpare_) {
      haveSpare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    haveSpare_ = true;
    return mean + stddev * r * std::cos(a);
  }

  /// Fisher-Yates shuffle driven by below(), so the permutation is
  /// reproducible across platforms.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  bool haveSpare_ = false;
  double spare_ = 0.0;
};

}  // namespace exmart
