#include <benchmark/benchmark.h>

#include "slownav/control.hpp"
#include "slownav/env2d.hpp"
#include "slownav/experiment.hpp"
#include "slownav/rng.hpp"
#include "slownav/sphering.hpp"

using namespace slownav;

namespace {

TimeSeries random_series(Eigen::Index len, Eigen::Index dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  TimeSeries s;
  s.values.resize(len, dim);
  for (Eigen::Index t = 0; t < len; ++t)
    for (Eigen::Index c = 0; c < dim; ++c) s.values(t, c) = rng.normal();
  return s;
}

void bm_wall_sensor(benchmark::State& state) {
  const Environment2D env = make_preset("two_rooms");
  SplitMix64 rng(1);
  std::vector<Eigen::Vector2d> points;
  while (points.size() < 64) {
    Eigen::Vector2d p(rng.next_double(), rng.next_double());
    if (env.is_interior(p, 1e-3)) points.push_back(p);
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wall_sensor(env, points[i++ % points.size()]));
  }
}
BENCHMARK(bm_wall_sensor);

void bm_expand_row(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const ExpansionSpec spec = ExpansionSpec::monomial(8, degree);
  Eigen::VectorXd input = Eigen::VectorXd::LinSpaced(8, 0.1, 0.9);
  Eigen::VectorXd out(spec.output_dim());
  for (auto _ : state) {
    spec.expand_row(input, out);
    benchmark::DoNotOptimize(out);
  }
  state.SetLabel(std::to_string(spec.output_dim()) + " terms");
}
BENCHMARK(bm_expand_row)->Arg(2)->Arg(4)->Arg(5);

void bm_fit_sphering(benchmark::State& state) {
  const Eigen::Index dim = state.range(0);
  const TimeSeries series = random_series(4 * dim, dim, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_sphering(series));
  }
}
BENCHMARK(bm_fit_sphering)->Arg(32)->Arg(128);

void bm_solve_norm_constrained(benchmark::State& state) {
  SplitMix64 rng(3);
  std::vector<ControlProblem> problems;
  for (int i = 0; i < 32; ++i) {
    ControlProblem p;
    p.u_tilde1.resize(6, 2);
    p.u_star.resize(6);
    for (int r = 0; r < 6; ++r) {
      p.u_star(r) = rng.normal();
      for (int c = 0; c < 2; ++c) p.u_tilde1(r, c) = rng.normal();
    }
    p.norm_c = 0.02;
    problems.push_back(std::move(p));
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_norm_constrained(problems[i++ % problems.size()]));
  }
}
BENCHMARK(bm_solve_norm_constrained);

void bm_navigation_step(benchmark::State& state) {
  ExperimentConfig cfg = default_config_for_preset("single_room");
  cfg.steps = 20000;
  cfg.degree = 4;
  cfg.R = 4;
  cfg.seed = 5;
  const ModelBundle bundle = train_bundle_from_walk(cfg);
  const SfaModel sfa = bundle.sfa_model();
  const Environment2D env = make_preset("single_room");
  WallSensorSystem system(env);
  const FeatureGoal goal =
      goal_in_feature_space(sfa, wall_sensor(env, {0.7, 0.7}).fractions, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sweep_step(sfa, bundle.pfax, system, Eigen::Vector2d(0.3, 0.3), {0, 1}, goal, 0.02));
  }
}
BENCHMARK(bm_navigation_step);

}  // namespace

BENCHMARK_MAIN();
