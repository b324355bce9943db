#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slownav/control.hpp"
#include "slownav/env2d.hpp"
#include "slownav/pendulum.hpp"
#include "slownav/pfax.hpp"
#include "slownav/sfa.hpp"

namespace slownav {

// Anything the navigator can drive: a sensor map and a one-step actuator.
class ControlledSystem {
 public:
  virtual ~ControlledSystem() = default;
  virtual Eigen::VectorXd sense(const Eigen::VectorXd& state) const = 0;
  virtual Eigen::VectorXd act(const Eigen::VectorXd& state,
                              const Eigen::VectorXd& control) const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual bool valid_state(const Eigen::VectorXd& state) const { return true; }
};

class WallSensorSystem : public ControlledSystem {
 public:
  explicit WallSensorSystem(Environment2D env) : env_(std::move(env)) {}
  Eigen::VectorXd sense(const Eigen::VectorXd& state) const override;
  Eigen::VectorXd act(const Eigen::VectorXd& state, const Eigen::VectorXd& control) const override;
  int state_dim() const override { return 2; }
  int control_dim() const override { return 2; }
  bool valid_state(const Eigen::VectorXd& state) const override;
  const Environment2D& env() const { return env_; }

 private:
  Environment2D env_;
};

class CartesianSystem : public ControlledSystem {
 public:
  explicit CartesianSystem(Environment2D env) : env_(std::move(env)) {}
  Eigen::VectorXd sense(const Eigen::VectorXd& state) const override { return state; }
  Eigen::VectorXd act(const Eigen::VectorXd& state, const Eigen::VectorXd& control) const override;
  int state_dim() const override { return 2; }
  int control_dim() const override { return 2; }
  bool valid_state(const Eigen::VectorXd& state) const override;
  const Environment2D& env() const { return env_; }

 private:
  Environment2D env_;
};

// State is the phase-space point (velocity, angle); the control is a scalar
// torque.
class PendulumSystem : public ControlledSystem {
 public:
  explicit PendulumSystem(PendulumConfig cfg) : cfg_(cfg) {}
  Eigen::VectorXd sense(const Eigen::VectorXd& state) const override { return state; }
  Eigen::VectorXd act(const Eigen::VectorXd& state, const Eigen::VectorXd& control) const override;
  int state_dim() const override { return 2; }
  int control_dim() const override { return 1; }
  const PendulumConfig& config() const { return cfg_; }

 private:
  PendulumConfig cfg_;
};

struct NavigationConfig {
  double theta = 0.1;        // feature-distance termination threshold
  double theta_tilde = 0.01; // minimal-progress threshold
  int R = 12;                // slow components available to the sweep
  long max_steps_total = 2000;
  long max_steps_per_phase = 0;  // 0: bounded only by the total cap
  int progress_window = 20;      // steps over which progress is measured
  double speed = 0.02;           // fixed control norm c
};

struct FeatureGoal {
  Eigen::VectorXd g_star;
  std::optional<Eigen::VectorXd> source_state;  // raw goal state, when known
};

enum class NavPhase { sweep, flat_area, disconnected, done, failure, budget };
std::string to_string(NavPhase phase);

struct TraceRow {
  long step = 0;
  Eigen::VectorXd state;
  Eigen::VectorXd features;
  int active = 1;  // component count during sweeps, component index during
                   // single-component passes
  Eigen::VectorXd control;
  double distance = 0.0;  // active-sum feature distance after the step
  NavPhase phase = NavPhase::sweep;
};

struct NavigationTrace {
  std::vector<TraceRow> rows;
  NavPhase terminal = NavPhase::failure;
  long steps_taken = 0;
  long restarts = 0;

  bool succeeded() const { return terminal == NavPhase::done; }
};

FeatureGoal goal_in_feature_space(const SfaModel& sfa, const Eigen::VectorXd& x_star, int R);

// Global navigation: sweep over slow components with greedy norm-constrained
// control per step; a no-progress window triggers the combined recovery
// routine (grow the active set for flat areas, then single-component passes
// for disconnected level sets, restarting the sweep after any improvement).
NavigationTrace navigate(const SfaModel& sfa, const PfaxModel& pfax,
                         const ControlledSystem& system, const Eigen::VectorXd& start,
                         const FeatureGoal& goal, const NavigationConfig& cfg);

// One greedy step against the active components (1-based indices into the
// feature vector). State history is seeded from the current state, so this
// matches the navigate loop exactly for p = q = 1.
struct SweepStepResult {
  Eigen::VectorXd control;
  Eigen::VectorXd new_state;
  Eigen::VectorXd new_features;
  double predicted_distance = 0.0;
};

SweepStepResult sweep_step(const SfaModel& sfa, const PfaxModel& pfax,
                           const ControlledSystem& system, const Eigen::VectorXd& state,
                           const std::vector<int>& active, const FeatureGoal& goal,
                           double speed);

// Net displacement after a few navigation steps from every interior lattice
// point.
struct FlowField {
  Eigen::MatrixXd points;   // m x 2
  Eigen::MatrixXd vectors;  // m x 2
};

FlowField flow_field(const SfaModel& sfa, const PfaxModel& pfax, const ControlledSystem& system,
                     const Environment2D& env, const FeatureGoal& goal,
                     const NavigationConfig& cfg, int grid_n, int steps_per_point = 5);

void write_trace_csv(const NavigationTrace& trace, const std::string& path);
void write_flow_csv(const FlowField& flow, const std::string& path);

}  // namespace slownav
