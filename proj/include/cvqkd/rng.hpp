#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace cvqkd {

// Deterministic random numbers with explicit stream derivation.
//
// All randomness in the toolkit flows from one manifest seed through named
// sub-streams and per-chunk streams, so a run is reproducible bit-for-bit
// regardless of how work is divided among threads. std::normal_distribution
// is deliberately avoided: its output is implementation-defined and it
// consumes a variable number of engine draws, either of which would break
// byte-identical output across platforms and worker counts.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++ core generator.
struct Xoshiro256pp {
  std::uint64_t s[4];

  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

// Derives an independent generator from (seed, stream_id). Streams for
// distinct ids are decorrelated by the splitmix64 avalanche; identical
// (seed, stream_id) pairs always yield identical sequences.
inline Xoshiro256pp make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t sm = seed ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1));
  Xoshiro256pp g;
  g.s[0] = splitmix64_next(sm);
  g.s[1] = splitmix64_next(sm);
  g.s[2] = splitmix64_next(sm);
  g.s[3] = splitmix64_next(sm);
  if ((g.s[0] | g.s[1] | g.s[2] | g.s[3]) == 0) g.s[0] = 1;  // all-zero state is invalid
  return g;
}

// FNV-1a hash for named sub-streams ("sampler", "waveform", ...).
inline std::uint64_t stream_name_hash(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline Xoshiro256pp make_named_stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return make_stream(seed ^ stream_name_hash(name), index);
}

// Uniform double in (0, 1]: 53 mantissa bits, never exactly 0 so it is safe
// under a logarithm.
inline double uniform_open01(Xoshiro256pp& g) {
  return (static_cast<double>(g.next() >> 11) + 1.0) * 0x1.0p-53;
}

// One uniformly random bit.
inline int uniform_bit(Xoshiro256pp& g) { return static_cast<int>(g.next() >> 63); }

struct GaussianPair {
  double z0, z1;
};

// Box-Muller in trigonometric form: exactly two engine draws per pair,
// no rejection loop, so the draw count per record is fixed — a requirement
// for chunked reproducibility.
inline GaussianPair gaussian_pair(Xoshiro256pp& g) {
  const double u1 = uniform_open01(g);
  const double u2 = uniform_open01(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

}
