#include "slownav/navigator.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <fstream>
#include <stdexcept>

namespace slownav {

Eigen::VectorXd WallSensorSystem::sense(const Eigen::VectorXd& state) const {
  return wall_sensor(env_, Eigen::Vector2d(state(0), state(1))).fractions;
}

Eigen::VectorXd WallSensorSystem::act(const Eigen::VectorXd& state,
                                      const Eigen::VectorXd& control) const {
  return step_agent(env_, Eigen::Vector2d(state(0), state(1)),
                    Eigen::Vector2d(control(0), control(1)));
}

bool WallSensorSystem::valid_state(const Eigen::VectorXd& state) const {
  return state.size() == 2 && env_.is_interior(Eigen::Vector2d(state(0), state(1)), 1e-9);
}

Eigen::VectorXd CartesianSystem::act(const Eigen::VectorXd& state,
                                     const Eigen::VectorXd& control) const {
  return step_agent(env_, Eigen::Vector2d(state(0), state(1)),
                    Eigen::Vector2d(control(0), control(1)));
}

bool CartesianSystem::valid_state(const Eigen::VectorXd& state) const {
  return state.size() == 2 && env_.is_interior(Eigen::Vector2d(state(0), state(1)), 1e-9);
}

Eigen::VectorXd PendulumSystem::act(const Eigen::VectorXd& state,
                                    const Eigen::VectorXd& control) const {
  PendulumState s{state(1), state(0)};
  s = pendulum_step(s, control(0), cfg_);
  return Eigen::Vector2d(s.velocity, s.angle);
}

std::string to_string(NavPhase phase) {
  switch (phase) {
    case NavPhase::sweep: return "sweep";
    case NavPhase::flat_area: return "flat-area";
    case NavPhase::disconnected: return "disconnected";
    case NavPhase::done: return "done";
    case NavPhase::failure: return "failure";
    case NavPhase::budget: return "budget";
  }
  return "?";
}

FeatureGoal goal_in_feature_space(const SfaModel& sfa, const Eigen::VectorXd& x_star, int R) {
  if (R < 1 || R > sfa.r()) throw std::invalid_argument("goal: R out of range");
  FeatureGoal goal;
  goal.g_star = sfa_extract_point(sfa, x_star).head(R);
  goal.source_state = x_star;
  return goal;
}

namespace {

// expand -> center -> project onto the model features, with the sphering
// folded into one matrix
struct FeaturePipeline {
  const ExpansionSpec* expansion = nullptr;
  Eigen::MatrixXd extractor;
  Eigen::VectorXd mean;

  static FeaturePipeline build(const SfaModel& sfa, const Eigen::MatrixXd& raw_extraction) {
    FeaturePipeline p;
    if (sfa.sphering) {
      p.extractor = sfa.sphering->whitener * raw_extraction;
      p.mean = sfa.sphering->mean;
    } else {
      p.extractor = raw_extraction;
    }
    if (sfa.expansion) p.expansion = &*sfa.expansion;
    return p;
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& sensor) const {
    Eigen::VectorXd stage = expansion ? expansion->expand_point(sensor) : sensor;
    if (mean.size()) stage -= mean;
    if (stage.size() != extractor.rows())
      throw std::invalid_argument("navigate: sensor dimension mismatch");
    return extractor.transpose() * stage;
  }
};

// Recovers the feature-mixing matrix a_sfa with goal features
// g = a_sfa^T m for model features m. Identity in proxy mode.
Eigen::MatrixXd mixing_matrix(const SfaModel& sfa, const PfaxModel& pfax) {
  if (pfax.extraction.rows() != sfa.extraction.rows())
    throw std::invalid_argument("navigate: model extraction dimensions disagree");
  const Eigen::MatrixXd a_sfa = pfax.extraction.transpose() * sfa.extraction;
  const double scale = std::max(1.0, sfa.extraction.norm());
  if ((pfax.extraction * a_sfa - sfa.extraction).norm() > 1e-6 * scale)
    throw std::invalid_argument(
        "navigate: goal features are not expressible in the prediction model's features");
  return a_sfa;
}

enum class PhaseOutcome { reached, stuck, budget };

struct Episode {
  const ControlledSystem& sys;
  const PfaxModel& pfax;
  const NavigationConfig& cfg;
  FeaturePipeline pipeline;     // sensor -> model features m
  Eigen::MatrixXd a_sfa;        // r x R feature mixing
  Eigen::VectorXd g_star;       // R goal features

  Eigen::VectorXd state;
  Eigen::VectorXd m_features;         // model features m
  Eigen::VectorXd g_features;         // goal-space features a_sfa^T m
  std::deque<Eigen::VectorXd> fhist;  // p most recent m vectors, newest first
  std::deque<Eigen::VectorXd> uhist;  // q-1 most recent controls, newest first
  NavigationTrace trace;

  Episode(const ControlledSystem& sys_, const PfaxModel& pfax_, const NavigationConfig& cfg_,
          FeaturePipeline pipeline_, Eigen::MatrixXd a_sfa_, Eigen::VectorXd g_star_,
          const Eigen::VectorXd& start)
      : sys(sys_), pfax(pfax_), cfg(cfg_), pipeline(std::move(pipeline_)),
        a_sfa(std::move(a_sfa_)), g_star(std::move(g_star_)), state(start) {
    m_features = pipeline(sys.sense(state));
    g_features = a_sfa.transpose() * m_features;
    for (int i = 0; i < pfax.p; ++i) fhist.push_back(m_features);
    for (int i = 0; i + 1 < pfax.q; ++i)
      uhist.push_back(Eigen::VectorXd::Zero(sys.control_dim()));
  }

  double distance(const std::vector<int>& active) const {
    double d = 0.0;
    for (int idx : active) {
      const double diff = g_features(idx) - g_star(idx);
      d += diff * diff;
    }
    // off-manifold states can produce non-finite features; never let them
    // satisfy a termination test
    return std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
  }

  Eigen::VectorXd stacked_features() const {
    Eigen::VectorXd fz(pfax.r() * pfax.p);
    for (int j = 0; j < pfax.p; ++j) fz.segment(j * pfax.r(), pfax.r()) = fhist[j];
    return fz;
  }

  Eigen::VectorXd stacked_controls() const {
    const Eigen::Index nu = sys.control_dim();
    Eigen::VectorXd mu(nu * (pfax.q - 1));
    for (int j = 0; j + 1 < pfax.q; ++j) mu.segment(j * nu, nu) = uhist[j];
    return mu;
  }

  Eigen::MatrixXd active_mixing(const std::vector<int>& active) const {
    Eigen::MatrixXd sel(pfax.r(), static_cast<Eigen::Index>(active.size()));
    for (size_t m = 0; m < active.size(); ++m)
      sel.col(static_cast<Eigen::Index>(m)) = a_sfa.col(active[m]);
    return sel;
  }

  Eigen::VectorXd active_goal(const std::vector<int>& active) const {
    Eigen::VectorXd goal(active.size());
    for (size_t m = 0; m < active.size(); ++m) goal(m) = g_star(active[m]);
    return goal;
  }

  // one greedy norm-constrained step; false when the total budget is spent
  bool step(const std::vector<int>& active, NavPhase tag, int label) {
    if (trace.steps_taken >= cfg.max_steps_total) return false;
    const ControlProblem cp = assemble_control_problem_features(
        pfax, active_mixing(active), active_goal(active), stacked_features(), stacked_controls(),
        cfg.speed);
    const Eigen::VectorXd u = solve_norm_constrained(cp);

    state = sys.act(state, u);
    m_features = pipeline(sys.sense(state));
    g_features = a_sfa.transpose() * m_features;
    fhist.push_front(m_features);
    fhist.pop_back();
    if (pfax.q > 1) {
      uhist.push_front(u);
      uhist.pop_back();
    }

    TraceRow row;
    row.step = trace.steps_taken;
    row.state = state;
    row.features = g_features;
    row.active = label;
    row.control = u;
    row.distance = distance(active);
    row.phase = tag;
    trace.rows.push_back(std::move(row));
    ++trace.steps_taken;
    return true;
  }

  // the While loop of one algorithm phase, with the windowed progress rule
  PhaseOutcome run_phase(const std::vector<int>& active, NavPhase tag, int label) {
    std::deque<double> window = {distance(active)};
    long phase_steps = 0;
    while (distance(active) > cfg.theta) {
      if (cfg.max_steps_per_phase > 0 && phase_steps >= cfg.max_steps_per_phase)
        return PhaseOutcome::stuck;
      if (!step(active, tag, label)) return PhaseOutcome::budget;
      ++phase_steps;
      window.push_back(distance(active));
      if (window.size() > static_cast<size_t>(cfg.progress_window) + 1) window.pop_front();
      if (window.size() == static_cast<size_t>(cfg.progress_window) + 1 &&
          window.back() > window.front() - cfg.theta_tilde)
        return PhaseOutcome::stuck;
    }
    return PhaseOutcome::reached;
  }
};

std::vector<int> prefix_indices(int count) {
  std::vector<int> v(count);
  for (int i = 0; i < count; ++i) v[i] = i;
  return v;
}

}  // namespace

NavigationTrace navigate(const SfaModel& sfa, const PfaxModel& pfax,
                         const ControlledSystem& system, const Eigen::VectorXd& start,
                         const FeatureGoal& goal, const NavigationConfig& cfg) {
  if (cfg.R < 1 || cfg.R > sfa.r()) throw std::invalid_argument("navigate: R out of range");
  if (!(cfg.theta > 0) || !(cfg.theta_tilde > 0) || cfg.progress_window < 1)
    throw std::invalid_argument("navigate: invalid thresholds");
  if (goal.g_star.size() < cfg.R) throw std::invalid_argument("navigate: goal too short");
  if (!system.valid_state(start)) throw std::invalid_argument("navigate: start state invalid");

  const Eigen::MatrixXd a_sfa = mixing_matrix(sfa, pfax).leftCols(cfg.R);
  Episode ep(system, pfax, cfg, FeaturePipeline::build(sfa, pfax.extraction), a_sfa,
             goal.g_star.head(cfg.R), start);

  const double initial_full = ep.distance(prefix_indices(cfg.R));
  const double cap_estimate = initial_full / cfg.theta_tilde + cfg.R + 2;
  const long restart_cap = cap_estimate < 1e17 ? static_cast<long>(cap_estimate)
                                               : std::numeric_limits<long>::max();

  while (true) {
    // Sweep: grow the active prefix, driving each partial sum under theta.
    int stuck_j = 0;
    for (int j = 1; j <= cfg.R; ++j) {
      const PhaseOutcome out = ep.run_phase(prefix_indices(j), NavPhase::sweep, j);
      if (out == PhaseOutcome::budget) {
        ep.trace.terminal = NavPhase::budget;
        return ep.trace;
      }
      if (out == PhaseOutcome::stuck) {
        stuck_j = j;
        break;
      }
    }
    if (stuck_j == 0) {
      ep.trace.terminal = NavPhase::done;
      return ep.trace;
    }

    // Combined recovery routine. First interpretation: the active components
    // are flat here; grow the active set one component at a time.
    bool restart = false;
    for (int k = stuck_j + 1; k <= cfg.R && !restart; ++k) {
      const PhaseOutcome out = ep.run_phase(prefix_indices(k), NavPhase::flat_area, k);
      if (out == PhaseOutcome::budget) {
        ep.trace.terminal = NavPhase::budget;
        return ep.trace;
      }
      if (out == PhaseOutcome::reached) restart = true;
    }

    // Second interpretation: a disconnected level set; exploit single
    // components and restart the sweep after any real improvement.
    if (!restart) {
      for (int i = stuck_j; i <= cfg.R && !restart; ++i) {
        const std::vector<int> single = {i - 1};
        const double before = ep.distance(single);
        const PhaseOutcome out = ep.run_phase(single, NavPhase::disconnected, i);
        if (out == PhaseOutcome::budget) {
          ep.trace.terminal = NavPhase::budget;
          return ep.trace;
        }
        if (before - ep.distance(single) > cfg.theta_tilde) restart = true;
      }
    }

    if (!restart) {
      ep.trace.terminal = NavPhase::failure;
      return ep.trace;
    }
    ++ep.trace.restarts;
    if (ep.trace.restarts > restart_cap) {
      ep.trace.terminal = NavPhase::failure;
      return ep.trace;
    }
  }
}

SweepStepResult sweep_step(const SfaModel& sfa, const PfaxModel& pfax,
                           const ControlledSystem& system, const Eigen::VectorXd& state,
                           const std::vector<int>& active, const FeatureGoal& goal,
                           double speed) {
  if (active.empty()) throw std::invalid_argument("sweep_step: empty active set");
  NavigationConfig cfg;
  cfg.R = static_cast<int>(goal.g_star.size());
  cfg.speed = speed;
  const Eigen::MatrixXd a_sfa = mixing_matrix(sfa, pfax).leftCols(cfg.R);
  Episode ep(system, pfax, cfg, FeaturePipeline::build(sfa, pfax.extraction), a_sfa,
             goal.g_star, state);

  const ControlProblem cp = assemble_control_problem_features(
      pfax, ep.active_mixing(active), ep.active_goal(active), ep.stacked_features(),
      ep.stacked_controls(), speed);

  SweepStepResult result;
  result.control = solve_norm_constrained(cp);
  result.predicted_distance = control_objective(cp, result.control);
  result.new_state = system.act(state, result.control);
  result.new_features =
      ep.a_sfa.transpose() * ep.pipeline(system.sense(result.new_state));
  return result;
}

FlowField flow_field(const SfaModel& sfa, const PfaxModel& pfax, const ControlledSystem& system,
                     const Environment2D& env, const FeatureGoal& goal,
                     const NavigationConfig& cfg, int grid_n, int steps_per_point) {
  if (grid_n < 1) throw std::invalid_argument("flow_field: grid must be positive");
  NavigationConfig local = cfg;
  local.max_steps_total = steps_per_point;

  std::vector<Eigen::Vector2d> pts;
  std::vector<Eigen::Vector2d> vecs;
  for (int iy = 0; iy < grid_n; ++iy) {
    for (int ix = 0; ix < grid_n; ++ix) {
      const Eigen::Vector2d p((ix + 0.5) / grid_n, (iy + 0.5) / grid_n);
      if (!env.is_interior(p, 1e-6)) continue;
      const NavigationTrace trace = navigate(sfa, pfax, system, p, goal, local);
      const Eigen::Vector2d end =
          trace.rows.empty() ? p : Eigen::Vector2d(trace.rows.back().state(0),
                                                   trace.rows.back().state(1));
      pts.push_back(p);
      vecs.push_back(end - p);
    }
  }

  FlowField flow;
  flow.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
  flow.vectors.resize(static_cast<Eigen::Index>(vecs.size()), 2);
  for (size_t i = 0; i < pts.size(); ++i) {
    flow.points.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    flow.vectors.row(static_cast<Eigen::Index>(i)) = vecs[i].transpose();
  }
  return flow;
}

void write_trace_csv(const NavigationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "step,x,y,j,ux,uy,dist,phase\n";
  for (const TraceRow& row : trace.rows) {
    const double x = row.state.size() > 0 ? row.state(0) : 0.0;
    const double y = row.state.size() > 1 ? row.state(1) : 0.0;
    const double ux = row.control.size() > 0 ? row.control(0) : 0.0;
    const double uy = row.control.size() > 1 ? row.control(1) : 0.0;
    out << row.step << ',' << format_double(x) << ',' << format_double(y) << ',' << row.active
        << ',' << format_double(ux) << ',' << format_double(uy) << ','
        << format_double(row.distance) << ',' << to_string(row.phase) << "\n";
  }
}

void write_flow_csv(const FlowField& flow, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "gx,gy,vx,vy\n";
  for (Eigen::Index i = 0; i < flow.points.rows(); ++i) {
    out << format_double(flow.points(i, 0)) << ',' << format_double(flow.points(i, 1)) << ','
        << format_double(flow.vectors(i, 0)) << ',' << format_double(flow.vectors(i, 1)) << "\n";
  }
}

}  // namespace slownav
