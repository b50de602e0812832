// Deterministic pseudo-random stream used for every sampled run.
//
// The generator is SplitMix64 (Steele, Lea & Flood, OOPSLA 2014; Vigna's
// public-domain reference implementation). It is counter-based: the n-th
// output of a stream is a pure function of (seed, n), so a stream value is
// reproducible on any platform from its (seed, counter) pair alone.
// Reference vectors are frozen in the test suite.

#pragma once

#include <cstdint>

namespace ksim {

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  // Output at (seed, counter): mix(seed + (counter+1) * gamma).
  static std::uint64_t value_at(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return value_at(seed_, counter_++); }

  // Uniform in [0, 1) from the top 53 bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Independent per-trial stream: trials may be evaluated in any order (or
  // in parallel) with identical results. The substream family is
  // domain-separated from the parent stream's own output sequence.
  RngStream substream(std::uint64_t index) const {
    return RngStream(value_at(seed_ ^ kGamma, index));
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace ksim
