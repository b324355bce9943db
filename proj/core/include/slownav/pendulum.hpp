#pragma once

#include <cstdint>

#include "slownav/time_series.hpp"

namespace slownav {

// Torque-limited pendulum. The angle is measured from the downward rest
// position and wrapped to (-pi, pi]; the torque limit is low enough that the
// agent cannot turn the pendulum up directly and has to swing it.
struct PendulumConfig {
  double k = 1.0;             // gravity * length coefficient
  double torque_limit = 0.4;  // |torque| is clamped to this
  double dt = 0.05;
  double damping = 0.0;
};

struct PendulumState {
  double angle = 0.0;
  double velocity = 0.0;
};

// Semi-implicit Euler on theta'' = -k sin(theta) - damping * theta' + torque.
PendulumState pendulum_step(const PendulumState& state, double torque,
                            const PendulumConfig& cfg);

// 0.5 w^2 - k cos(theta); the upright position has energy +k.
double pendulum_energy(const PendulumState& state, const PendulumConfig& cfg);

// Random torques uniform in [-limit, limit]. The recorded sensor signal is
// the phase space point (velocity, amplitude); states has steps+1 rows,
// torques has steps rows aligned like the 2D walk.
struct PendulumWalk {
  TimeSeries states;
  TimeSeries torques;
};

PendulumWalk pendulum_random_walk(const PendulumConfig& cfg, long steps, std::uint64_t seed);

}  // namespace slownav
