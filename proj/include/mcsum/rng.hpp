#pragma once

#include <cstdint>
#include <random>

namespace mcsum {

// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not, so draws are derived from raw 64-bit outputs here.
// Any implementation using MT19937-64 plus these two conversions reproduces
// the same sequence of choices.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    auto idx = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return idx < n ? idx : n - 1;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcsum
