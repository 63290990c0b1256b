#pragma once

#include <cstdint>
#include <random>

namespace lrvmc {

// SplitMix64 step, used to expand a (seed, stream id) key into well-separated
// generator seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream keyed by (seed, stream_id). Streams with different ids
// are independent regardless of how work is scheduled across workers.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t key = seed ^ (0x632be59bd9b4e019ULL * (stream_id + 1));
  const std::uint64_t a = splitmix64(key);
  const std::uint64_t b = splitmix64(key);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// Uniform double in [0, 1) with 53 random bits. Hand-rolled so the stream is
// identical across standard-library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline int uniform_index(std::mt19937_64& rng, int n) {
  return static_cast<int>(uniform01(rng) * n) % n;
}

// Standard normal via Box-Muller (deterministic draw order, two uniforms per call).
inline double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace lrvmc
