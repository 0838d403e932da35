#pragma once

#include <cmath>
#include <cstdint>

#include "sklu/types.hpp"

namespace sklu {

/// Counter-based pseudo-random generator (splitmix64). Output i is a fixed
/// bijective mix of seed + i*GOLDEN, so the stream is reproducible across
/// platforms and independent sub-streams can be split off by re-seeding with
/// a mixed tag. This is the single source of randomness in the library; the
/// algorithm identifier below is persisted next to every seeded artifact.
class SplitMix64 {
 public:
  static constexpr const char* kAlgorithmId = "splitmix64-v1";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53 bits of mantissa.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_gaussian_;
    }
    double u1 = next_double();
    const double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_gaussian_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  /// Independent generator derived from this seed and a tag.
  SplitMix64 split(std::uint64_t tag) const { return SplitMix64(mix(state_ ^ mix(tag))); }

 private:
  std::uint64_t state_;
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

/// n i.i.d. standard normals.
inline Vector gaussian_vector(Index n, SplitMix64& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.next_gaussian();
  return v;
}

/// Uniform draw from the unit sphere in R^n.
inline Vector unit_sphere_vector(Index n, SplitMix64& rng) {
  Vector v = gaussian_vector(n, rng);
  const double nrm = v.norm();
  if (nrm > 0.0) v /= nrm;
  return v;
}

}  // namespace sklu
