#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace totsched {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive decorrelated seeds and
/// counter-based uniforms from integer keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of keys into one 64-bit value. Order matters.
constexpr std::uint64_t hash_keys(std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto k : keys) h = mix64(h ^ mix64(k));
  return h;
}

/// Seed for stream `stream` of a run seeded with `seed`.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return hash_keys({seed, stream});
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(stream_seed(seed, stream));
}

/// Uniform in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform01(Rng& rng) { return to_unit(rng()); }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Standard normal via Box-Muller. Spelled out so sequences do not depend on
/// the standard library's distribution implementation.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline int uniform_int(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n);
}

}  // namespace totsched
