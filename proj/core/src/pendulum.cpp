#include "slownav/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slownav/rng.hpp"

namespace slownav {
namespace {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace

PendulumState pendulum_step(const PendulumState& state, double torque,
                            const PendulumConfig& cfg) {
  const double tq = std::clamp(torque, -cfg.torque_limit, cfg.torque_limit);
  PendulumState next;
  next.velocity = state.velocity +
                  cfg.dt * (-cfg.k * std::sin(state.angle) - cfg.damping * state.velocity + tq);
  next.angle = wrap_angle(state.angle + cfg.dt * next.velocity);
  return next;
}

double pendulum_energy(const PendulumState& state, const PendulumConfig& cfg) {
  return 0.5 * state.velocity * state.velocity - cfg.k * std::cos(state.angle);
}

PendulumWalk pendulum_random_walk(const PendulumConfig& cfg, long steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("pendulum walk: steps must be >= 1");
  SplitMix64 rng(seed);
  PendulumWalk walk;
  walk.states.values.resize(steps + 1, 2);
  walk.torques.values.resize(steps, 1);
  PendulumState s;
  walk.states.values.row(0) << s.velocity, s.angle;
  for (long t = 0; t < steps; ++t) {
    const double tq = rng.uniform(-cfg.torque_limit, cfg.torque_limit);
    walk.torques.values(t, 0) = tq;
    s = pendulum_step(s, tq, cfg);
    walk.states.values.row(t + 1) << s.velocity, s.angle;
  }
  return walk;
}

}  // namespace slownav
