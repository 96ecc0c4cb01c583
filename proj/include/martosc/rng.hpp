#pragma once

// Counter-based SplitMix64 streams. Trial i of a run with master seed s draws
// its j-th word as mix(key + golden * j) with key = mix(s + golden * (i + 1)),
// so any trial can be replayed in isolation and worker count never matters.

#include <cstddef>
#include <cstdint>
#include <span>

namespace martosc {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial) : key_(mix64(seed + kGolden * (trial + 1))) {}

  std::uint64_t next() { return mix64(key_ + kGolden * ++counter_); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Draws a symbol from next-symbol conditionals by inversion.
  std::uint32_t symbol(std::span<const double> cond) {
    const double u = uniform();
    double acc = 0.0;
    std::uint32_t last_positive = 0;
    for (std::size_t a = 0; a < cond.size(); ++a) {
      if (cond[a] <= 0.0) continue;
      last_positive = static_cast<std::uint32_t>(a);
      acc += cond[a];
      if (u < acc) return last_positive;
    }
    return last_positive;  // rounding left u above the running total
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace martosc
