#pragma once

#include <cstdint>

namespace slownav {

// Seedable random stream with a stable cross-platform sequence, built on the
// splitmix64 update. Every stochastic routine in the library draws from this
// generator; platform default RNGs are never used.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;

  // uniform on [0, 1) with 53-bit resolution
  double next_double() noexcept;

  // uniform on [lo, hi)
  double uniform(double lo, double hi) noexcept;

  // uniform on [0, 2*pi)
  double uniform_angle() noexcept;

  // standard normal, Box-Muller with a cached spare
  double normal() noexcept;

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace slownav
