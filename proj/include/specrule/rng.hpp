#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace specrule {

/// Counter-based 64-bit generator. The i-th output of a stream is
/// mix64(key + i * 2^64/phi) where mix64 is the SplitMix64 finalizer and
/// key is derived from (seed, stream-id); there is no hidden state beyond
/// the counter, so streams can be split, replayed, and consumed in
/// parallel deterministically. Constants are the published SplitMix64 set.
class RngStream {
public:
  static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_(stream_id),
        key_(mix64(mix64(seed + kWeyl) ^ mix64(stream_id + 0x5851F42D4C957F2Dull))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix64(key_ + (counter_++) * kWeyl); }

  /// Uniform on [0,1), 53-bit mantissa.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1]; safe as a log argument.
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second member of each pair is cached.
  double normal() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 6.283185307179586476925286766559 * uniform01();
    cache_ = r * std::sin(t);
    have_cache_ = true;
    return r * std::cos(t);
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_cache_ = false;
  double cache_ = 0.0;
};

}  // namespace specrule
