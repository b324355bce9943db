// slownav: learn a controllable slow-feature model of an environment from a
// random walk, then solve navigation tasks on it.
//
// Exit codes: 0 success, 1 navigation failure or step budget exhausted,
// 2 invalid input, 3 numeric failure.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slownav/bundle.hpp"
#include "slownav/experiment.hpp"
#include "slownav/navigator.hpp"
#include "slownav/pendulum.hpp"
#include "slownav/time_series.hpp"

namespace fs = std::filesystem;
using namespace slownav;

namespace {

Eigen::Vector2d parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("expected 'x,y', got '" + text + "'");
  return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

int cmd_presets(const std::string& export_dir) {
  for (const std::string& name : preset_names()) {
    const Environment2D env = make_preset(name);
    std::cout << name << " (" << env.segment_count() << " segments)\n";
    if (!export_dir.empty()) {
      fs::create_directories(export_dir);
      write_segments_csv(env, export_dir + "/" + name + ".csv");
    }
  }
  return 0;
}

int cmd_explore(const ExperimentConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (cfg.sensor == "pendulum") {
    const PendulumWalk walk = pendulum_random_walk(cfg.pendulum, cfg.steps, cfg.seed);
    write_series_csv(walk.states, out_dir + "/positions.csv");
    write_series_csv(walk.states, out_dir + "/sensors.csv");
    write_series_csv(walk.torques, out_dir + "/controls.csv");
  } else {
    const Environment2D env = make_preset(cfg.preset);
    const Walk2D walk = random_walk(env, {cfg.steps, cfg.step_size, cfg.seed});
    write_series_csv(walk.positions, out_dir + "/positions.csv");
    write_series_csv(sense_series(env, walk.positions, cfg.sensor == "cartesian"),
                     out_dir + "/sensors.csv");
    write_series_csv(walk.controls, out_dir + "/controls.csv");
  }
  save_config(cfg, out_dir + "/config.json");
  std::cout << "wrote walk to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& walk_dir, const std::string& config_path,
              const std::string& out_path) {
  const std::string cfg_file =
      config_path.empty() ? walk_dir + "/config.json" : config_path;
  const ExperimentConfig cfg = load_config(cfg_file);
  const TimeSeries sensors = read_series_csv(walk_dir + "/sensors.csv");
  const TimeSeries controls = read_series_csv(walk_dir + "/controls.csv");
  const ModelBundle bundle = train_bundle(cfg, sensors, controls);
  save_bundle(bundle, out_path);
  std::cout << "trained " << bundle.sfa_extraction.cols() << " components (expanded dim "
            << bundle.expansion.output_dim() << "), bundle written to " << out_path << "\n";
  return 0;
}

int cmd_features(const std::string& bundle_path, int grid, const std::string& out_path) {
  const ModelBundle bundle = load_bundle(bundle_path);
  if (bundle.system == "pendulum")
    throw std::invalid_argument("features: lattice evaluation needs a 2D environment bundle");
  write_feature_grid_csv(bundle, make_preset(bundle.preset), grid, out_path);
  std::cout << "wrote feature grid to " << out_path << "\n";
  return 0;
}

int cmd_navigate(const std::string& bundle_path, const std::string& start_text,
                 const std::string& goal_text, const ExperimentConfig& nav_overrides,
                 const std::string& out_path) {
  const ModelBundle bundle = load_bundle(bundle_path);
  const SfaModel sfa = bundle.sfa_model();
  const auto system = make_system(bundle);
  const NavigationConfig nav = navigation_config_from(bundle, nav_overrides);

  const Eigen::Vector2d start = parse_point(start_text);
  const Eigen::Vector2d goal_state = parse_point(goal_text);
  const Eigen::VectorXd goal_sensor = system->sense(goal_state);
  const FeatureGoal goal = goal_in_feature_space(sfa, goal_sensor, nav.R);

  const NavigationTrace trace = navigate(sfa, bundle.pfax, *system, start, goal, nav);
  if (!out_path.empty()) write_trace_csv(trace, out_path);
  std::cout << to_string(trace.terminal) << " after " << trace.steps_taken << " steps ("
            << trace.restarts << " sweep restarts)\n";
  return trace.succeeded() ? 0 : 1;
}

int cmd_flow(const std::string& bundle_path, const std::string& goal_text, int grid, int steps,
             const ExperimentConfig& nav_overrides, const std::string& out_path) {
  const ModelBundle bundle = load_bundle(bundle_path);
  if (bundle.system == "pendulum")
    throw std::invalid_argument("flow: lattice evaluation needs a 2D environment bundle");
  const SfaModel sfa = bundle.sfa_model();
  const auto system = make_system(bundle);
  const NavigationConfig nav = navigation_config_from(bundle, nav_overrides);
  const Environment2D env = make_preset(bundle.preset);

  const Eigen::Vector2d goal_state = parse_point(goal_text);
  const FeatureGoal goal = goal_in_feature_space(sfa, system->sense(goal_state), nav.R);
  const FlowField flow = flow_field(sfa, bundle.pfax, *system, env, goal, nav, grid, steps);
  write_flow_csv(flow, out_path);
  std::cout << "wrote " << flow.points.rows() << " flow vectors to " << out_path << "\n";
  return 0;
}

int cmd_experiment(const std::string& name, const std::string& out_dir, std::uint64_t seed,
                   int degree) {
  const Metrics metrics = run_experiment(name, out_dir, seed, degree);
  for (const auto& [key, value] : metrics) std::cout << key << " = " << value << "\n";
  std::cout << "metrics written to " << out_dir << "/metrics.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slow-feature navigation: explore, train, navigate"};
  app.require_subcommand(1);

  // explore
  auto* explore = app.add_subcommand("explore", "random-walk exploration of an environment");
  std::string config_path, out_dir = "out";
  ExperimentConfig cfg;
  bool have_preset = false;
  std::string preset;
  explore->add_option("--config", config_path, "config file (JSON)");
  explore->add_option("--preset", preset, "environment preset");
  explore->add_option("--steps", cfg.steps, "walk length");
  explore->add_option("--step-size", cfg.step_size, "exploration step size");
  explore->add_option("--seed", cfg.seed, "random seed");
  explore->add_option("--sensor", cfg.sensor, "wall | cartesian | pendulum");
  explore->add_option("--out", out_dir, "output directory");

  // train
  auto* train = app.add_subcommand("train", "fit sphering + SFA + prediction model");
  std::string walk_dir, bundle_out = "bundle.json";
  train->add_option("--walk", walk_dir, "directory with sensors.csv/controls.csv")->required();
  train->add_option("--config", config_path, "config file (defaults to <walk>/config.json)");
  train->add_option("--out", bundle_out, "bundle output path");

  // features
  auto* features = app.add_subcommand("features", "evaluate components over a lattice");
  std::string bundle_path, out_file = "features.csv";
  int grid = 50;
  features->add_option("--bundle", bundle_path, "trained bundle")->required();
  features->add_option("--grid", grid, "lattice resolution");
  features->add_option("--out", out_file, "output CSV");

  // navigate
  auto* nav = app.add_subcommand("navigate", "drive the agent to a goal state");
  std::string start_text, goal_text, trace_out;
  ExperimentConfig nav_cfg;
  nav_cfg.theta = 0;
  nav->add_option("--bundle", bundle_path, "trained bundle")->required();
  nav->add_option("--start", start_text, "start state 'x,y'")->required();
  nav->add_option("--goal", goal_text, "goal state 'x,y'")->required();
  nav->add_option("--theta", nav_cfg.theta, "termination threshold (default: from bundle)");
  nav->add_option("--theta-tilde", nav_cfg.theta_tilde, "minimal-progress threshold");
  nav->add_option("--R", nav_cfg.R, "number of slow components");
  nav->add_option("--max-steps", nav_cfg.max_steps, "step budget");
  nav->add_option("--speed", nav_cfg.speed, "control norm (default: from bundle)");
  nav->add_option("--out", trace_out, "trace CSV path");

  // flow
  auto* flow = app.add_subcommand("flow", "initial-motion field over a lattice");
  int flow_steps = 5;
  flow->add_option("--bundle", bundle_path, "trained bundle")->required();
  flow->add_option("--goal", goal_text, "goal state 'x,y'")->required();
  flow->add_option("--grid", grid, "lattice resolution");
  flow->add_option("--steps", flow_steps, "navigation steps per lattice point");
  flow->add_option("--R", nav_cfg.R, "number of slow components");
  flow->add_option("--out", out_file, "output CSV");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a canned study end to end");
  std::string exp_name;
  std::uint64_t exp_seed = 0;
  int exp_degree = 0;
  exp->add_option("name", exp_name, "experiment name (see --list)");
  bool list_experiments = false;
  exp->add_flag("--list", list_experiments, "list experiment names");
  exp->add_option("--out", out_dir, "output directory");
  exp->add_option("--seed", exp_seed, "random seed (0: experiment default)");
  exp->add_option("--degree", exp_degree, "expansion degree override (cartesian)");

  // presets
  auto* presets = app.add_subcommand("presets", "list environment presets");
  std::string export_dir;
  presets->add_option("--export", export_dir, "write segment CSVs to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (explore->parsed()) {
      if (!config_path.empty()) {
        cfg = load_config(config_path);
      } else if (!preset.empty()) {
        const ExperimentConfig defaults = default_config_for_preset(preset);
        const long steps = explore->count("--steps") ? cfg.steps : defaults.steps;
        const double step_size =
            explore->count("--step-size") ? cfg.step_size : defaults.step_size;
        const std::string sensor = explore->count("--sensor") ? cfg.sensor : defaults.sensor;
        const std::uint64_t seed = explore->count("--seed") ? cfg.seed : defaults.seed;
        cfg = defaults;
        cfg.steps = steps;
        cfg.step_size = step_size;
        cfg.sensor = sensor;
        cfg.seed = seed;
      } else if (cfg.sensor != "pendulum") {
        throw std::invalid_argument("explore: need --config or --preset");
      }
      if (explore->count("--preset")) cfg.preset = preset;
      return cmd_explore(cfg, out_dir);
    }
    if (train->parsed()) return cmd_train(walk_dir, config_path, bundle_out);
    if (features->parsed()) return cmd_features(bundle_path, grid, out_file);
    if (nav->parsed()) return cmd_navigate(bundle_path, start_text, goal_text, nav_cfg, trace_out);
    if (flow->parsed())
      return cmd_flow(bundle_path, goal_text, grid, flow_steps, nav_cfg, out_file);
    if (exp->parsed()) {
      if (list_experiments) {
        for (const auto& n : experiment_names()) std::cout << n << "\n";
        return 0;
      }
      if (exp_name.empty()) throw std::invalid_argument("experiment: name required");
      return cmd_experiment(exp_name, out_dir, exp_seed, exp_degree);
    }
    if (presets->parsed()) return cmd_presets(export_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
