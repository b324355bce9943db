#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "slownav/rng.hpp"
#include "slownav/time_series.hpp"

namespace slownav {

// Directed wall segment. Only the left side of a -> b is a visible face, so
// a zero-thickness internal wall is modelled as two coincident anti-parallel
// segments, one per room it separates. Boundary loops run with the free
// space on their left (outer loops counter-clockwise, obstacle loops
// clockwise).
struct Segment {
  Eigen::Vector2d a, b;
};

struct Environment2D {
  std::string preset_name;
  std::vector<Segment> segments;          // stable id = index
  std::vector<std::vector<int>> loops;    // segment ids per closed loop
  Eigen::Vector2d default_start{0.5, 0.5};

  int segment_count() const { return static_cast<int>(segments.size()); }

  // strictly inside the free space (winding test; degenerate wall loops
  // cancel out)
  bool contains(const Eigen::Vector2d& p) const;
  double boundary_distance(const Eigen::Vector2d& p) const;
  bool is_interior(const Eigen::Vector2d& p, double margin = 1e-9) const;
};

// Presets match the multiroom, corridor and obstacle environments studied in
// the experiments; coordinates are fixed constants, normalized to [0,1]^2
// (see docs/presets.md for diagrams). Door widths are 10-15% of room width.
Environment2D make_preset(const std::string& name);
std::vector<std::string> preset_names();

void write_segments_csv(const Environment2D& env, const std::string& path);

// Fraction of the 360-degree field of view occupied by each wall segment,
// computed by an exact angular sweep over segment-endpoint events. Fractions
// sum to 1 at any interior point; fully occluded segments read 0.
struct WallSensorReading {
  Eigen::VectorXd fractions;
};

WallSensorReading wall_sensor(const Environment2D& env, const Eigen::Vector2d& position);

// Plain coordinates as a sensor.
Eigen::Vector2d cartesian_sensor(const Eigen::Vector2d& position);

// Displacement clipped at the first wall crossing, with a small collision
// margin that keeps the agent strictly interior.
inline constexpr double kCollisionMargin = 1e-6;
Eigen::Vector2d step_agent(const Environment2D& env, const Eigen::Vector2d& position,
                           const Eigen::Vector2d& control);

struct RandomWalkConfig {
  long steps = 1;
  double step_size = 0.02;
  std::uint64_t seed = 0;
};

// Uniform random direction each step, fixed intended step size, clipped at
// walls. positions has steps+1 rows (the start state first); controls has
// steps rows, row t being the intended displacement applied when leaving
// positions row t.
struct Walk2D {
  TimeSeries positions;
  TimeSeries controls;
};

Walk2D random_walk(const Environment2D& env, const RandomWalkConfig& cfg);

// Sensor series for a position series.
TimeSeries sense_series(const Environment2D& env, const TimeSeries& positions,
                        bool cartesian = false);

}  // namespace slownav
