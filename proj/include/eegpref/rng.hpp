#pragma once

#include <cstdint>

namespace eegpref {

// SplitMix64. Fixed so that a seed names the same stream in every
// implementation of the pipeline.
class Rng64 {
 public:
  explicit constexpr Rng64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by 128-bit multiply-shift; no rejection loop, so
  // each draw consumes exactly one word of the stream.
  constexpr std::uint64_t next_below(std::uint64_t bound) noexcept {
    return mul_high(next_u64(), bound);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_unit(); }

  // Standard normal via Box-Muller; one pair of words per draw (the sine
  // branch is discarded to keep the stream position easy to reason about).
  double next_gaussian() noexcept;

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  // High 64 bits of the 128-bit product a * b.
  static constexpr std::uint64_t mul_high(std::uint64_t a, std::uint64_t b) noexcept {
    const std::uint64_t a_lo = a & 0xffffffffULL, a_hi = a >> 32;
    const std::uint64_t b_lo = b & 0xffffffffULL, b_hi = b >> 32;
    const std::uint64_t lo_lo = a_lo * b_lo;
    const std::uint64_t hi_lo = a_hi * b_lo;
    const std::uint64_t lo_hi = a_lo * b_hi;
    const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xffffffffULL) + lo_hi;
    return a_hi * b_hi + (hi_lo >> 32) + (cross >> 32);
  }

  std::uint64_t state_;
};

}  // namespace eegpref
