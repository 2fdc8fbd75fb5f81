#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gammaflow {

inline constexpr const char* kVersion = "0.1.0";

// Counter-free splittable RNG. Used instead of <random> distributions so that
// sampled certificates are reproducible across compilers and thread counts.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    double u1 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692528676655900577 * u2);
  }
};

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Derives an independent stream for sample `index`; aggregation order then
// cannot affect results, whatever the worker count.
inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
  SplitMix64 s(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  return s.next();
}

}  // namespace gammaflow
