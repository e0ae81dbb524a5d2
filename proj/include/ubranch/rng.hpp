#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ubranch {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stream for replicate `replicate` of master seed `seed`: seed XOR splitmix64(replicate).
/// Independent of execution order, so parallel and serial runs see the same draws.
inline Rng make_stream(std::uint64_t seed, std::uint64_t replicate) {
  return Rng(seed ^ splitmix64(replicate));
}

/// Uniform on the open interval (0, 1), 53-bit resolution.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open(rng)) / rate; }

inline bool bernoulli(Rng& rng, double p) { return uniform_open(rng) < p; }

/// Offset k >= 1 with P(k) = (1 - base) base^(k-1), by inversion.
inline std::int64_t geometric_offset(Rng& rng, double base) {
  if (base <= 0.0) return 1;
  return 1 + static_cast<std::int64_t>(std::floor(std::log(uniform_open(rng)) / std::log(base)));
}

/// Value n >= 1 with P(n) = success (1 - success)^(n-1). Stable for tiny `success`.
inline std::int64_t geometric_count(Rng& rng, double success) {
  if (success >= 1.0) return 1;
  const double draw = std::floor(std::log(uniform_open(rng)) / std::log1p(-success));
  if (draw >= 9.0e18) return INT64_MAX;
  return 1 + static_cast<std::int64_t>(draw);
}

}  // namespace ubranch
