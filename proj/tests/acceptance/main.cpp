// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Returns the number of failed criteria.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "slownav/control.hpp"
#include "slownav/env2d.hpp"
#include "slownav/experiment.hpp"
#include "slownav/pfax.hpp"
#include "slownav/rng.hpp"

namespace fs = std::filesystem;
using namespace slownav;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Runner {
 public:
  explicit Runner(std::string work) : work_(std::move(work)) { fs::create_directories(work_); }

  const Metrics& metrics(const std::string& experiment) {
    auto it = cache_.find(experiment);
    if (it != cache_.end()) return it->second;
    const std::string dir = work_ + "/" + experiment;
    Metrics m;
    const std::string metrics_path = dir + "/metrics.json";
    if (fs::exists(metrics_path)) {
      m = read_metrics(metrics_path);  // reuse a previous run of this suite
    } else {
      std::cout << "[running experiment " << experiment << "]" << std::endl;
      m = run_experiment(experiment, dir);
    }
    return cache_.emplace(experiment, std::move(m)).first->second;
  }

  const std::string& work() const { return work_; }

 private:
  std::string work_;
  std::map<std::string, Metrics> cache_;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

void check_ge(Outcome& o, const Metrics& m, const std::string& key, double bound) {
  const double v = m.at(key);
  if (!(v >= bound)) o.pass = false;
  o.detail += key + "=" + fmt(v) + (v >= bound ? ">=" : "<") + fmt(bound) + " ";
}

void check_le(Outcome& o, const Metrics& m, const std::string& key, double bound) {
  const double v = m.at(key);
  if (!(v <= bound)) o.pass = false;
  o.detail += key + "=" + fmt(v) + (v <= bound ? "<=" : ">") + fmt(bound) + " ";
}

// -- criterion 1: constraint suite on every trained bundle ------------------

Outcome criterion_constraints(Runner& r) {
  Outcome o;
  for (const std::string exp :
       {"single-room", "two-rooms", "three-rooms", "four-rooms",
        "three-rooms-corridor", "obstacle"}) {
    const Metrics& m = r.metrics(exp);
    Outcome local;
    check_le(local, m, "constraint_mean_max", 1e-8);
    check_le(local, m, "constraint_var_err", 1e-6);
    check_le(local, m, "constraint_corr_max", 1e-6);
    check_le(local, m, "constraint_orth_err", 1e-8);
    check_le(local, m, "delta_rel_err", 1e-6);  // stored vs empirical slowness
    if (!local.pass) {
      o.pass = false;
      o.detail += "[" + exp + ": " + local.detail + "] ";
    }
  }
  if (o.pass) o.detail = "mean/variance/decorrelation/orthonormality within bounds on 6 bundles";
  return o;
}

// -- criterion 2: 1D harmonics ----------------------------------------------

Outcome criterion_harmonics(Runner& r) {
  Outcome o;
  const Metrics& m = r.metrics("harmonics-1d");
  check_ge(o, m, "corr_500k_h1", 0.99);
  check_ge(o, m, "corr_500k_h2", 0.95);
  check_ge(o, m, "corr_500k_h3", 0.95);
  check_ge(o, m, "corr_500k_h4", 0.90);
  check_ge(o, m, "corr_30k_h1", 0.97);
  return o;
}

// -- criterion 3: first-harmonic monotonicity --------------------------------

Outcome criterion_monotonicity(Runner& r) {
  Outcome o;
  check_ge(o, r.metrics("harmonics-1d"), "spearman_abs", 0.99);
  const Metrics& b = r.metrics("bottleneck");
  const double v = b.at("spearman_abs");
  if (!(v >= 0.99)) o.pass = false;
  o.detail += "bottleneck_spearman=" + fmt(v) + " ";
  return o;
}

// -- criterion 4: Chebyshev relation -----------------------------------------

Outcome criterion_chebyshev(Runner& r) {
  Outcome o;
  check_ge(o, r.metrics("harmonics-1d"), "cheb2_corr", 0.95);
  return o;
}

// -- criterion 5: Hermite case ------------------------------------------------

Outcome criterion_hermite(Runner& r) {
  Outcome o;
  check_ge(o, r.metrics("hermite-1d"), "h1_abs_corr", 0.98);
  return o;
}

// -- criterion 6: constrained controller vs brute force -----------------------

Outcome criterion_controller(Runner&) {
  Outcome o;
  SplitMix64 rng(2024);
  double worst_gap = 0.0, worst_norm = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int nu = 2 + static_cast<int>(rng.next_u64() % 2);
    const int rows = nu + static_cast<int>(rng.next_u64() % 2);
    const double c = 0.25 + rng.next_double();
    ControlProblem p;
    p.u_tilde1.resize(rows, nu);
    p.u_star.resize(rows);
    for (int i = 0; i < rows; ++i) {
      p.u_star(i) = rng.normal();
      for (int j = 0; j < nu; ++j) p.u_tilde1(i, j) = rng.normal();
    }
    p.norm_c = c;
    const Eigen::VectorXd u = solve_norm_constrained(p);
    worst_norm = std::max(worst_norm, std::abs(u.norm() - c) / c);
    const double mine = control_objective(p, u);

    double scan = std::numeric_limits<double>::infinity();
    if (nu == 2) {
      for (long i = 0; i < 1000000; ++i) {
        const double a = 2.0 * std::numbers::pi * i / 1000000;
        scan = std::min(scan,
                        control_objective(p, Eigen::Vector2d(c * std::cos(a), c * std::sin(a))));
      }
    } else {
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (long i = 0; i < 200000; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / 200000;
        const double rad = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double a = golden * i;
        scan = std::min(scan, control_objective(p, Eigen::Vector3d(c * rad * std::cos(a), c * y,
                                                                   c * rad * std::sin(a))));
      }
    }
    worst_gap = std::max(worst_gap, (mine - scan) / std::max(1.0, std::abs(scan)));
  }
  o.pass = worst_gap <= 1e-6 && worst_norm <= 1e-9;
  o.detail = "worst objective gap vs scan " + fmt(worst_gap) + ", worst norm error " +
             fmt(worst_norm);
  return o;
}

// -- criterion 7: PFAx closed forms -------------------------------------------

Outcome criterion_pfax(Runner& r) {
  Outcome o;
  for (const std::string exp : {"single-room", "two-rooms", "obstacle"}) {
    const Metrics& m = r.metrics(exp);
    Outcome local;
    check_le(local, m, "stationarity_res_b", 1e-6);
    check_le(local, m, "stationarity_res_u", 1e-6);
    if (!local.pass) {
      o.pass = false;
      o.detail += "[" + exp + ": " + local.detail + "] ";
    }
  }
  // proxy extraction stays within 5x of the predictability-selected one
  check_le(o, r.metrics("single-room"), "proxy_over_full", 5.0);

  {
    SplitMix64 rng(55);
    TimeSeries z, u;
    z.values.resize(40000, 1);
    u.values = Eigen::MatrixXd::Zero(40000, 1);
    double x = 0.0;
    for (Eigen::Index t = 0; t < z.len(); ++t) {
      x = 0.9 * x + rng.normal();
      z.values(t, 0) = x;
    }
    const PredictorPair bu =
        fit_predictors(Eigen::MatrixXd::Identity(1, 1), lag_embed(z, u, 1, 1));
    const double err = std::abs(bu.B(0, 0) - 0.9);
    if (err > 0.02) o.pass = false;
    o.detail += "ar1_err=" + fmt(err) + " ";
  }
  {
    SplitMix64 rng(56);
    TimeSeries z, u;
    u.values.resize(3000, 2);
    z.values.resize(3000, 2);
    z.values.row(0).setZero();
    for (Eigen::Index t = 0; t < 3000; ++t) {
      u.values.row(t) << rng.uniform(-1, 1), rng.uniform(-1, 1);
      if (t + 1 < 3000) z.values.row(t + 1) = u.values.row(t);
    }
    const LaggedEmbedding emb = lag_embed(z, u, 1, 1);
    const PredictorPair bu = fit_predictors(Eigen::MatrixXd::Identity(2, 2), emb);
    const double uerr = (bu.U - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd resid =
        emb.targets - emb.zeta * bu.B.transpose() - emb.mu * bu.U.transpose();
    const double rmse = resid.squaredNorm() / static_cast<double>(emb.count());
    if (uerr > 1e-8 || rmse > 1e-10) o.pass = false;
    o.detail += "identity_system_uerr=" + fmt(uerr) + " resid=" + fmt(rmse);
  }
  return o;
}

// -- criterion 8: wall sensor vs ray oracle -----------------------------------

Outcome criterion_wall_sensor(Runner&) {
  Outcome o;
  const long rays = 65536;
  double worst = 0.0, worst_sum = 0.0;
  for (const std::string& name : preset_names()) {
    const Environment2D env = make_preset(name);
    SplitMix64 rng(7000 + env.segment_count());
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::Vector2d p;
      do {
        p = Eigen::Vector2d(rng.next_double(), rng.next_double());
      } while (!env.is_interior(p, 1e-3));
      const WallSensorReading exact = wall_sensor(env, p);
      worst_sum = std::max(worst_sum, std::abs(exact.fractions.sum() - 1.0));

      Eigen::VectorXd approx = Eigen::VectorXd::Zero(env.segment_count());
      for (long ray = 0; ray < rays; ++ray) {
        const double a = 2.0 * std::numbers::pi * (ray + 0.5) / rays;
        const Eigen::Vector2d dir(std::cos(a), std::sin(a));
        double best_t = std::numeric_limits<double>::infinity();
        int best = -1;
        for (int id = 0; id < env.segment_count(); ++id) {
          const Segment& s = env.segments[id];
          const Eigen::Vector2d e = s.b - s.a;
          if (e.x() * dir.y() - e.y() * dir.x() >= 0) continue;
          const Eigen::Vector2d ap = s.a - p;
          const double denom = dir.x() * e.y() - dir.y() * e.x();
          const double t = (ap.x() * e.y() - ap.y() * e.x()) / denom;
          const double s_par = (ap.x() * dir.y() - ap.y() * dir.x()) / denom;
          if (s_par < 0.0 || s_par > 1.0 || t <= 1e-12) continue;
          if (t < best_t) {
            best_t = t;
            best = id;
          }
        }
        if (best >= 0) approx(best) += 1.0;
      }
      approx /= static_cast<double>(rays);
      worst = std::max(worst, (exact.fractions - approx).cwiseAbs().maxCoeff());
    }
  }

  const WallSensorReading center = wall_sensor(make_preset("single_room"), {0.5, 0.5});
  const double center_err = (center.fractions.array() - 0.25).abs().maxCoeff();
  o.pass = worst <= 2.0 / rays && worst_sum <= 1e-6 && center_err <= 1e-9;
  o.detail = "worst component gap " + fmt(worst) + " (bound " + fmt(2.0 / rays) +
             "), worst sum error " + fmt(worst_sum) + ", center error " + fmt(center_err);
  return o;
}

// -- criteria 9-13: experiment-level checks -----------------------------------

Outcome criterion_two_rooms(Runner& r) {
  Outcome o;
  const Metrics& m = r.metrics("two-rooms");
  check_ge(o, m, "nav_success_rate", 0.9);
  if (m.at("cross_successes") > 0) check_ge(o, m, "cross_through_door_fraction", 1.0);
  check_ge(o, m, "room_gap_c1", 1.0);  // room identity separates by over one sigma
  return o;
}

Outcome criterion_multiroom(Runner& r) {
  Outcome o;
  for (const std::string exp : {"three-rooms", "four-rooms"}) {
    const Metrics& m = r.metrics(exp);
    Outcome local;
    check_ge(local, m, "room_gap_c1", 1.0);
    check_ge(local, m, "nav_success_rate", 0.8);
    o.detail += "[" + exp + ": " + local.detail + "] ";
    if (!local.pass) o.pass = false;
  }
  return o;
}

Outcome criterion_obstacle(Runner& r) {
  Outcome o;
  const Metrics& m = r.metrics("obstacle");
  const bool vertical = m.at("vertical_r1_success") == 1.0;
  const bool horizontal_r1 = m.at("horizontal_r1_success") == 1.0;
  const bool horizontal_r2 = m.at("horizontal_r2_success") == 1.0;
  o.pass = vertical && !horizontal_r1 && horizontal_r2;
  o.detail = "vertical_r1=" + fmt(m.at("vertical_r1_success")) +
             " horizontal_r1=" + fmt(m.at("horizontal_r1_success")) +
             " horizontal_r2=" + fmt(m.at("horizontal_r2_success"));
  return o;
}

Outcome criterion_bottleneck(Runner& r) {
  Outcome o;
  const Metrics& m = r.metrics("bottleneck");
  check_ge(o, m, "slope_ratio", 5.0);
  const double center = m.at("occupancy_center");
  const double outer = m.at("occupancy_outer_median");
  if (!(center < 0.5 * outer)) o.pass = false;
  o.detail += "center_bin=" + fmt(center) + " outer_median=" + fmt(outer);
  return o;
}

Outcome criterion_pendulum(Runner& r) {
  Outcome o;
  const Metrics& m = r.metrics("pendulum");
  const double successes = m.at("success_count");
  o.pass = successes >= 1.0;  // best-effort: hard failure only below 1 of 5
  o.detail = "energy target reached in " + fmt(successes) + " of 5 seeds (target 3, hard floor 1)";
  if (successes < 3.0) o.detail += " [below target, logged]";
  return o;
}

// -- criterion 14: determinism -------------------------------------------------

Outcome criterion_determinism(Runner& r) {
  Outcome o;
  const std::string dir_a = r.work() + "/det_a";
  const std::string dir_b = r.work() + "/det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  run_experiment("hermite-1d", dir_a, 77);
  run_experiment("hermite-1d", dir_b, 77);

  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const std::string name = entry.path().filename().string();
    std::ifstream a(entry.path(), std::ios::binary);
    std::ifstream b(dir_b + "/" + name, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (sa.str() != sb.str() || sa.str().empty()) {
      o.pass = false;
      o.detail += name + " differs ";
    }
  }
  if (o.pass) o.detail = "re-run artifacts byte-identical";
  return o;
}

struct Criterion {
  int id;
  std::string label;
  std::function<Outcome(Runner&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::string work = "acceptance_work";
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--work") == 0 && i + 1 < argc) work = argv[++i];
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "sphering/SFA constraint suite", criterion_constraints},
      {2, "1D harmonics correlations", criterion_harmonics},
      {3, "first-harmonic monotonicity (Spearman)", criterion_monotonicity},
      {4, "Chebyshev higher-harmonic relation", criterion_chebyshev},
      {5, "Hermite case (mean-reverting walk)", criterion_hermite},
      {6, "norm-constrained controller vs brute force", criterion_controller},
      {7, "PFAx closed forms and stationarity", criterion_pfax},
      {8, "wall sensor vs 65536-ray oracle", criterion_wall_sensor},
      {9, "two-room navigation battery", criterion_two_rooms},
      {10, "three/four-room structure and navigation", criterion_multiroom},
      {11, "obstacle component flip", criterion_obstacle},
      {12, "bottleneck steepness attractor", criterion_bottleneck},
      {13, "pendulum swing-up (best effort)", criterion_pendulum},
      {14, "experiment determinism", criterion_determinism},
  };

  Runner runner(work);
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run(runner);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion-" << c.id << ": " << c.label
              << " -- " << o.detail << std::endl;
    if (!o.pass) ++failures;
  }
  return failures;
}
