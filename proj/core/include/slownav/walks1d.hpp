#pragma once

#include <cstdint>

#include "slownav/time_series.hpp"

namespace slownav {

// 1D random walk on [a, b] with steps uniform on [-delta, delta] shifted by a
// normally-shaped repeller eta(x) that pushes away from the interval center,
// carving a bottleneck into the occupancy distribution. Steps beyond the
// boundary are simply cut off. tau = 0 recovers the plain uniform-step walk.
struct RepellerWalkConfig {
  double a = 0.0, b = 1.0;
  double delta = 0.02;   // step strength
  double tau = 0.0;      // repeller strength
  double sigma = 0.05;   // repeller width
  long steps = 1;
  std::uint64_t seed = 0;

  double center() const { return 0.5 * (a + b); }
};

// sign(x - center) * tau / sqrt(2 pi sigma^2) * exp(-(x - center)^2 / (2 sigma^2))
double repeller_eta(const RepellerWalkConfig& cfg, double x);

// Starts at center + sigma, one row per state including the start.
TimeSeries bottleneck_walk_1d(const RepellerWalkConfig& cfg);

// Plain uniform-step walk on [a, b] with explicit start.
TimeSeries uniform_walk_1d(double a, double b, double delta, long steps,
                           std::uint64_t seed, double start);

// Mean-reverting walk x += rate * (0 - x) + noise * N(0, 1); approximately
// Gaussian-stationary for small rate.
TimeSeries ou_walk_1d(double rate, double noise, long steps, std::uint64_t seed);

}  // namespace slownav
