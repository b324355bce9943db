#include "slownav/walks1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slownav/rng.hpp"

namespace slownav {

double repeller_eta(const RepellerWalkConfig& cfg, double x) {
  const double d = x - cfg.center();
  const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
  return sign * cfg.tau / std::sqrt(2.0 * std::numbers::pi * cfg.sigma * cfg.sigma) *
         std::exp(-d * d / (2.0 * cfg.sigma * cfg.sigma));
}

TimeSeries bottleneck_walk_1d(const RepellerWalkConfig& cfg) {
  if (!(cfg.b > cfg.a) || !(cfg.delta > 0) || !(cfg.sigma > 0) || cfg.tau < 0 || cfg.steps < 1)
    throw std::invalid_argument("bottleneck walk: invalid config");
  SplitMix64 rng(cfg.seed);
  TimeSeries out;
  out.values.resize(cfg.steps + 1, 1);
  double x = std::min(cfg.center() + cfg.sigma, cfg.b);
  out.values(0, 0) = x;
  for (long t = 0; t < cfg.steps; ++t) {
    const double step = repeller_eta(cfg, x) + rng.uniform(-cfg.delta, cfg.delta);
    x = std::clamp(x + step, cfg.a, cfg.b);
    out.values(t + 1, 0) = x;
  }
  return out;
}

TimeSeries uniform_walk_1d(double a, double b, double delta, long steps,
                           std::uint64_t seed, double start) {
  if (!(b > a) || !(delta > 0) || steps < 1 || start < a || start > b)
    throw std::invalid_argument("uniform walk: invalid config");
  SplitMix64 rng(seed);
  TimeSeries out;
  out.values.resize(steps + 1, 1);
  double x = start;
  out.values(0, 0) = x;
  for (long t = 0; t < steps; ++t) {
    x = std::clamp(x + rng.uniform(-delta, delta), a, b);
    out.values(t + 1, 0) = x;
  }
  return out;
}

TimeSeries ou_walk_1d(double rate, double noise, long steps, std::uint64_t seed) {
  if (!(rate > 0) || !(rate < 1) || !(noise > 0) || steps < 1)
    throw std::invalid_argument("ou walk: invalid config");
  SplitMix64 rng(seed);
  TimeSeries out;
  out.values.resize(steps + 1, 1);
  double x = 0.0;
  out.values(0, 0) = x;
  for (long t = 0; t < steps; ++t) {
    x += rate * (0.0 - x) + noise * rng.normal();
    out.values(t + 1, 0) = x;
  }
  return out;
}

}  // namespace slownav
