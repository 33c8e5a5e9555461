#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace maglocate {

// Portable random source: std::mt19937_64 (bit sequence fixed by the
// standard) with uniform and normal variates derived here rather than through
// the implementation-defined std:: distributions, so a seed reproduces the
// same doubles on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the Marsaglia polar method.
  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);

// Per-trial seed: mix64 chained over (master, fnv1a64(scenario), pose, trial).
std::uint64_t trial_seed(std::uint64_t master_seed, std::string_view scenario, std::uint64_t pose_index,
                         std::uint64_t trial_index);

}  // namespace maglocate
