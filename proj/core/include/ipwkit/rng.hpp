#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ipwkit {

/// Name recorded in run metadata so other implementations can reproduce
/// label resolution and synthetic corpora bit-for-bit.
inline constexpr std::string_view kRngAlgorithm =
    "xoshiro256** seeded by splitmix64(seed, stream)";

std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** with a deterministic (seed, stream) keying. Every stream is
/// an independent generator, so per-record draws do not depend on the order
/// in which records are processed.
///
/// Seeding: s = splitmix64 state initialised to seed ^ mix(stream), where
/// mix(stream) is one splitmix64 output of `stream`; the four state words
/// are the next four splitmix64 outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 bits: (x >> 11) * 2^-53.
  double uniform();

  /// Uniform on (0, 1), never exactly 0; used by log/inverse-CDF draws.
  double uniform_open();

  /// Unbiased integer in [0, bound) by rejection on the top of the range.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (one variate per call, no caching).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace ipwkit
