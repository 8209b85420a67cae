#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace spde::rng {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based hash of (key, counter): the value depends only on its
/// arguments, never on call order.
constexpr std::uint64_t hash2(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(mix64(key) ^ mix64(counter ^ 0x632be59bd9b4e019ULL));
}

/// Uniform in (0, 1), 53 random bits, never exactly 0.
inline double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Pair of independent standard normals from counter `counter` of stream `key`
/// (Box-Muller on two hashed uniforms).
inline std::pair<double, double> normal_pair(std::uint64_t key, std::uint64_t counter) noexcept {
  const double u1 = to_open_unit(hash2(key, 2 * counter));
  const double u2 = to_open_unit(hash2(key, 2 * counter + 1));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Seed for sample `index` of a Monte Carlo run keyed by `master_seed`.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return hash2(master_seed ^ 0xa0761d6478bd642fULL, index);
}

}  // namespace spde::rng
