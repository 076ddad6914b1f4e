#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wrs {

/// SplitMix64 output function. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a over the bytes of a label. Stable across platforms.
constexpr std::uint64_t stable_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed for `tag` under `parent`. For a fixed parent, distinct tags
/// give distinct children.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept {
  return splitmix64(parent ^ splitmix64(tag));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view purpose) noexcept {
  return derive_seed(parent, stable_hash(purpose));
}

/// Seeded random stream over std::mt19937_64.
///
/// The engine is fully specified by the standard, and every mapping to
/// doubles or bounded integers is done here rather than through the
/// implementation-defined <random> distributions, so a seed reproduces the
/// same sequence on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). `n == 0` denotes the full 64-bit range.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Independent stream for `purpose`, derived from this stream's seed
  /// (not its current position).
  RandomStream substream(std::string_view purpose) const {
    return RandomStream(derive_seed(seed_, purpose));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// The streams owned by one optimizer run.
///
/// Candidate coordinates and change draws come from separate streams, so a
/// WRS step with an all-ones schedule consumes the sampling stream exactly
/// like an RS step.
struct RunStreams {
  RandomStream sampling;
  RandomStream gate;
  RandomStream model;

  static RunStreams from_seed(std::uint64_t run_seed) {
    RandomStream root(run_seed);
    return RunStreams{root.substream("sampling"), root.substream("gate"),
                      root.substream("model")};
  }
};

}  // namespace wrs
