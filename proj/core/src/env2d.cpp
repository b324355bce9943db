#include "slownav/env2d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace slownav {
namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double point_segment_distance(const Eigen::Vector2d& p, const Segment& s) {
  const Eigen::Vector2d d = s.b - s.a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - s.a).norm();
  const double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

// first hit parameter of the motion segment p -> p + d against a wall,
// infinity when there is none
double crossing_parameter(const Eigen::Vector2d& p, const Eigen::Vector2d& d, const Segment& w) {
  const Eigen::Vector2d e = w.b - w.a;
  const double denom = cross2(d, e);
  if (std::abs(denom) < 1e-15) return std::numeric_limits<double>::infinity();
  const Eigen::Vector2d ap = w.a - p;
  const double t = cross2(ap, e) / denom;
  const double s = cross2(ap, d) / denom;
  constexpr double slack = 1e-12;
  if (t < -slack || t > 1.0 + slack || s < -slack || s > 1.0 + slack)
    return std::numeric_limits<double>::infinity();
  return std::max(t, 0.0);
}

void add_loop(Environment2D& env, const std::vector<Eigen::Vector2d>& vertices) {
  std::vector<int> loop;
  const int base = env.segment_count();
  for (size_t i = 0; i < vertices.size(); ++i) {
    env.segments.push_back({vertices[i], vertices[(i + 1) % vertices.size()]});
    loop.push_back(base + static_cast<int>(i));
  }
  env.loops.push_back(std::move(loop));
}

// Zero-thickness internal wall from a to b with door gaps, given as intervals
// of the [0,1] parameter along the wall. Each solid piece becomes a
// degenerate two-segment loop, one face per side.
void add_wall(Environment2D& env, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
              const std::vector<std::pair<double, double>>& gaps) {
  std::vector<std::pair<double, double>> pieces;
  double cursor = 0.0;
  for (const auto& [g0, g1] : gaps) {
    if (g0 > cursor) pieces.emplace_back(cursor, g0);
    cursor = std::max(cursor, g1);
  }
  if (cursor < 1.0) pieces.emplace_back(cursor, 1.0);
  for (const auto& [t0, t1] : pieces) {
    if (t1 - t0 < 1e-12) continue;
    const Eigen::Vector2d p0 = a + t0 * (b - a);
    const Eigen::Vector2d p1 = a + t1 * (b - a);
    add_loop(env, {p0, p1});  // two coincident anti-parallel segments
  }
}

}  // namespace

bool Environment2D::contains(const Eigen::Vector2d& p) const {
  int winding = 0;
  for (const Segment& s : segments) {
    if (s.a.y() <= p.y()) {
      if (s.b.y() > p.y() && cross2(s.b - s.a, p - s.a) > 0) ++winding;
    } else {
      if (s.b.y() <= p.y() && cross2(s.b - s.a, p - s.a) < 0) --winding;
    }
  }
  return winding > 0;
}

double Environment2D::boundary_distance(const Eigen::Vector2d& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment& s : segments) best = std::min(best, point_segment_distance(p, s));
  return best;
}

bool Environment2D::is_interior(const Eigen::Vector2d& p, double margin) const {
  return contains(p) && boundary_distance(p) > margin;
}

std::vector<std::string> preset_names() {
  return {"single_room", "two_rooms",           "three_rooms",
          "four_rooms",  "three_rooms_corridor", "obstacle"};
}

Environment2D make_preset(const std::string& name) {
  Environment2D env;
  env.preset_name = name;
  const std::vector<Eigen::Vector2d> unit_square = {
      {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};

  if (name == "single_room") {
    add_loop(env, unit_square);
    env.default_start = {0.5, 0.5};
  } else if (name == "two_rooms") {
    add_loop(env, unit_square);
    add_wall(env, {0.0, 0.5}, {1.0, 0.5}, {{0.425, 0.575}});
    env.default_start = {0.5, 0.25};
  } else if (name == "three_rooms") {
    // three rooms forking from a central junction (T layout); each room is
    // an arm whose long coordinate becomes a leading slow source
    add_loop(env, {{0.34, 0.0}, {0.66, 0.0}, {0.66, 0.34}, {1.0, 0.34}, {1.0, 0.66},
                   {0.0, 0.66}, {0.0, 0.34}, {0.34, 0.34}});
    env.default_start = {0.5, 0.15};
  } else if (name == "four_rooms") {
    // four shallow rooms around a broad central junction: the unit square
    // with its corners cut away
    add_loop(env, {{0.25, 0.0}, {0.75, 0.0}, {0.75, 0.25}, {1.0, 0.25}, {1.0, 0.75},
                   {0.75, 0.75}, {0.75, 1.0}, {0.25, 1.0}, {0.25, 0.75}, {0.0, 0.75},
                   {0.0, 0.25}, {0.25, 0.25}});
    env.default_start = {0.5, 0.12};
  } else if (name == "three_rooms_corridor") {
    // a less symmetric arrangement: three rooms of different sizes opening
    // onto a large rectangular corridor along the bottom
    add_loop(env, {{0.0, 0.0},  {1.0, 0.0},  {1.0, 0.3},  {0.98, 0.3}, {0.98, 0.85},
                   {0.68, 0.85}, {0.68, 0.3}, {0.64, 0.3}, {0.64, 0.65}, {0.40, 0.65},
                   {0.40, 0.3},  {0.33, 0.3}, {0.33, 0.75}, {0.02, 0.75}, {0.02, 0.3},
                   {0.0, 0.3}});
    env.default_start = {0.5, 0.15};
  } else if (name == "obstacle") {
    // taller than wide, with a broad flat obstacle: vertical trips take the
    // long way around and the vertical coordinate is the slowest source
    add_loop(env, {{0.0, 0.0}, {0.8, 0.0}, {0.8, 1.0}, {0.0, 1.0}});
    // clockwise: free space on the left of each edge
    add_loop(env, {{0.15, 0.45}, {0.15, 0.55}, {0.65, 0.55}, {0.65, 0.45}});
    env.default_start = {0.4, 0.2};
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return env;
}

void write_segments_csv(const Environment2D& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "id,x0,y0,x1,y1\n";
  for (int i = 0; i < env.segment_count(); ++i) {
    const Segment& s = env.segments[i];
    out << i << ',' << format_double(s.a.x()) << ',' << format_double(s.a.y()) << ','
        << format_double(s.b.x()) << ',' << format_double(s.b.y()) << "\n";
  }
}

WallSensorReading wall_sensor(const Environment2D& env, const Eigen::Vector2d& position) {
  if (!env.is_interior(position, 1e-9))
    throw std::invalid_argument("wall_sensor: position not strictly interior");

  // angular events at segment endpoints; between consecutive events the
  // nearest front-facing segment cannot change
  std::vector<double> events;
  events.reserve(env.segments.size() * 2);
  for (const Segment& s : env.segments) {
    events.push_back(std::atan2(s.a.y() - position.y(), s.a.x() - position.x()));
    events.push_back(std::atan2(s.b.y() - position.y(), s.b.x() - position.x()));
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  WallSensorReading reading;
  reading.fractions = Eigen::VectorXd::Zero(env.segment_count());
  const double two_pi = 2.0 * std::numbers::pi;
  const size_t m = events.size();
  for (size_t i = 0; i < m; ++i) {
    const double lo = events[i];
    const double hi = (i + 1 < m) ? events[i + 1] : events[0] + two_pi;
    const double width = hi - lo;
    if (width <= 0) continue;
    const double mid = lo + 0.5 * width;
    const Eigen::Vector2d dir(std::cos(mid), std::sin(mid));

    double best_t = std::numeric_limits<double>::infinity();
    int best_id = -1;
    for (int id = 0; id < env.segment_count(); ++id) {
      const Segment& s = env.segments[id];
      const Eigen::Vector2d e = s.b - s.a;
      if (cross2(e, dir) >= 0) continue;  // back face or parallel
      const double denom = cross2(dir, e);
      const Eigen::Vector2d ap = s.a - position;
      const double t = cross2(ap, e) / denom;
      const double u = cross2(ap, dir) / denom;
      if (u < -1e-12 || u > 1.0 + 1e-12 || t <= 1e-12) continue;
      if (t < best_t) {
        best_t = t;
        best_id = id;
      }
    }
    if (best_id >= 0) reading.fractions(best_id) += width;
  }
  reading.fractions /= two_pi;
  return reading;
}

Eigen::Vector2d cartesian_sensor(const Eigen::Vector2d& position) { return position; }

Eigen::Vector2d step_agent(const Environment2D& env, const Eigen::Vector2d& position,
                           const Eigen::Vector2d& control) {
  if (!env.is_interior(position, 0.0))
    throw std::invalid_argument("step_agent: position not interior");
  const double length = control.norm();
  if (length == 0.0) return position;

  double first = std::numeric_limits<double>::infinity();
  for (const Segment& s : env.segments)
    first = std::min(first, crossing_parameter(position, control, s));

  double travel = std::isfinite(first)
                      ? std::max(0.0, first * length - kCollisionMargin)
                      : length;
  const Eigen::Vector2d dir = control / length;
  for (int attempt = 0; attempt < 60; ++attempt) {
    const Eigen::Vector2d candidate = position + travel * dir;
    if (travel == 0.0) return position;
    if (env.is_interior(candidate, 1e-9)) return candidate;
    travel *= 0.5;
    if (travel < 1e-12) travel = 0.0;
  }
  return position;
}

Walk2D random_walk(const Environment2D& env, const RandomWalkConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("random_walk: steps must be >= 1");
  if (!(cfg.step_size > 0)) throw std::invalid_argument("random_walk: step_size must be positive");
  const Eigen::Vector2d start = env.default_start;
  if (!env.is_interior(start, kCollisionMargin))
    throw std::invalid_argument("random_walk: start not interior");

  SplitMix64 rng(cfg.seed);
  Walk2D walk;
  walk.positions.values.resize(cfg.steps + 1, 2);
  walk.controls.values.resize(cfg.steps, 2);
  Eigen::Vector2d pos = start;
  walk.positions.values.row(0) = pos.transpose();
  for (long t = 0; t < cfg.steps; ++t) {
    const double angle = rng.uniform_angle();
    const Eigen::Vector2d u(cfg.step_size * std::cos(angle), cfg.step_size * std::sin(angle));
    walk.controls.values.row(t) = u.transpose();
    pos = step_agent(env, pos, u);
    walk.positions.values.row(t + 1) = pos.transpose();
  }
  return walk;
}

TimeSeries sense_series(const Environment2D& env, const TimeSeries& positions, bool cartesian) {
  if (positions.dim() != 2) throw std::invalid_argument("sense_series: positions must be 2D");
  TimeSeries out;
  const Eigen::Index dim = cartesian ? 2 : env.segment_count();
  out.values.resize(positions.len(), dim);
  for (Eigen::Index t = 0; t < positions.len(); ++t) {
    const Eigen::Vector2d p = positions.values.row(t).transpose();
    if (cartesian)
      out.values.row(t) = p.transpose();
    else
      out.values.row(t) = wall_sensor(env, p).fractions.transpose();
  }
  return out;
}

}  // namespace slownav
