#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bsdelab {

// Counter-based noise: every variate is a pure function of
// (seed, path, step, dim, stream). There is no generator state, so any
// subset of an ensemble can be regenerated bit-identically in any order
// and from any thread partition.

enum class NoiseStream : std::uint64_t {
  increments = 0,
  bridge = 1,
  checker_y = 2,
  checker_z = 3,
  checker_aux = 4,
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                                std::uint64_t dim, std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ path);
  h = splitmix64(h ^ step);
  h = splitmix64(h ^ dim);
  h = splitmix64(h ^ stream);
  return h;
}

inline double to_unit(std::uint64_t bits) {
  // top 53 bits -> [0,1)
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline double counter_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                              std::uint64_t dim, NoiseStream stream) {
  // slot offset keeps uniform draws disjoint from the Box-Muller key pairs
  return detail::to_unit(
      detail::mix_key(seed, path, step, dim, 1024 + static_cast<std::uint64_t>(stream)));
}

/// Standard normal via Box-Muller on two decorrelated keys.
inline double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                             std::uint64_t dim, NoiseStream stream) {
  const std::uint64_t s = static_cast<std::uint64_t>(stream);
  const std::uint64_t k1 = detail::mix_key(seed, path, step, dim, 2 * s);
  const std::uint64_t k2 = detail::mix_key(seed, path, step, dim, 2 * s + 1);
  // u1 in (0,1] keeps the log finite
  const double u1 = 1.0 - detail::to_unit(k1);
  const double u2 = detail::to_unit(k2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace bsdelab
