#pragma once

#include <cmath>
#include <cstdint>

namespace rankbreak {

// Deterministic 64-bit stream (splitmix64). Every stochastic routine takes one of
// these by reference, so identical seeds reproduce identical draws on any platform;
// nothing here depends on implementation-defined std <random> distributions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Exponential with the given rate. uniform01() < 1 keeps the log argument positive.
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; all uses here have n << 2^32.
    return next_u64() % n;
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Seed of the child stream at `index`: a stable function of (construction seed,
  // index), independent of how much the parent has been consumed.
  std::uint64_t derive(std::uint64_t index) const {
    RngStream mix(seed_ ^ (0xD2B74407B1CE6E93ULL * (index + 1)));
    return mix.next_u64();
  }

  RngStream substream(std::uint64_t index) const { return RngStream(derive(index)); }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace rankbreak
