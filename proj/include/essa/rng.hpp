#pragma once
// Deterministic randomness primitives. Everything that consumes entropy in
// the simulator (spreading sequences, preambles, user messages, noise) is
// driven by SplitMix64 streams keyed by explicit 64-bit seeds, so results
// are reproducible across platforms and independent of thread scheduling.

#include <cstddef>
#include <cstdint>
#include <cmath>
#include <numbers>

namespace essa {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

// FNV-1a over a byte buffer, optionally continuing from a previous state.
inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t len,
                             std::uint64_t state = kFnvOffsetBasis) {
  for (std::size_t i = 0; i < len; ++i) {
    state ^= data[i];
    state *= kFnvPrime;
  }
  return state;
}

// SplitMix64 (Steele, Lea, Flood). The i-th output is a pure function of
// (seed, i), which is what makes per-frame substreams cheap: no jump-ahead
// machinery, just a fresh seed per stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // One uniformly random bit per word, taken from the top (best-mixed) bit.
  int next_bit() { return static_cast<int>(next() >> 63); }

  // Uniform double in the open interval (0, 1): 53-bit mantissa, centered
  // so that 0 and 1 are unreachable (safe as a log() argument).
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Seed for the substream that drives frame `frame_index` of a run:
// FNV-1a over the little-endian bytes of master_seed then frame_index.
inline std::uint64_t substream_seed(std::uint64_t master_seed,
                                    std::uint64_t frame_index) {
  unsigned char buf[16];
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<unsigned char>(master_seed >> (8 * i));
    buf[8 + i] = static_cast<unsigned char>(frame_index >> (8 * i));
  }
  return fnv1a64(buf, sizeof buf);
}

// Standard normal deviates via Box-Muller on a SplitMix64 stream. Draws are
// made in pairs; the second deviate is cached so that the number of raw
// words consumed is a deterministic function of the number of samples.
class GaussianSource {
 public:
  explicit GaussianSource(SplitMix64& rng) : rng_(rng) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.uniform01();
    const double u2 = rng_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  SplitMix64& rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace essa
