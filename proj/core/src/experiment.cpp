#include "slownav/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "slownav/harmonics.hpp"
#include "slownav/walks1d.hpp"

namespace slownav {
namespace {

using nlohmann::json;

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["sensor"] = c.sensor;
  j["steps"] = c.steps;
  j["step_size"] = c.step_size;
  j["seed"] = c.seed;
  j["basis"] = c.basis;
  j["degree"] = c.degree;
  j["p"] = c.p;
  j["q"] = c.q;
  j["r"] = c.r;
  j["R"] = c.R;
  j["k"] = c.k;
  j["full_pfax"] = c.full_pfax;
  j["eigen_floor"] = c.eigen_floor;
  j["theta"] = c.theta;
  j["theta_tilde"] = c.theta_tilde;
  j["progress_window"] = c.progress_window;
  j["max_steps"] = c.max_steps;
  j["speed"] = c.speed;
  j["pendulum"] = {{"k", c.pendulum.k},
                   {"torque_limit", c.pendulum.torque_limit},
                   {"dt", c.pendulum.dt},
                   {"damping", c.pendulum.damping}};
  return j;
}

void config_from_json(const json& j, ExperimentConfig& c) {
  if (j.contains("preset")) c.preset = j["preset"].get<std::string>();
  if (j.contains("sensor")) c.sensor = j["sensor"].get<std::string>();
  if (j.contains("steps")) c.steps = j["steps"].get<long>();
  if (j.contains("step_size")) c.step_size = j["step_size"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("basis")) c.basis = j["basis"].get<std::string>();
  if (j.contains("degree")) c.degree = j["degree"].get<int>();
  if (j.contains("p")) c.p = j["p"].get<int>();
  if (j.contains("q")) c.q = j["q"].get<int>();
  if (j.contains("r")) c.r = j["r"].get<int>();
  if (j.contains("R")) c.R = j["R"].get<int>();
  if (j.contains("k")) c.k = j["k"].get<int>();
  if (j.contains("full_pfax")) c.full_pfax = j["full_pfax"].get<bool>();
  if (j.contains("eigen_floor")) c.eigen_floor = j["eigen_floor"].get<double>();
  if (j.contains("theta")) c.theta = j["theta"].get<double>();
  if (j.contains("theta_tilde")) c.theta_tilde = j["theta_tilde"].get<double>();
  if (j.contains("progress_window")) c.progress_window = j["progress_window"].get<int>();
  if (j.contains("max_steps")) c.max_steps = j["max_steps"].get<long>();
  if (j.contains("speed")) c.speed = j["speed"].get<double>();
  if (j.contains("pendulum")) {
    const json& pe = j["pendulum"];
    if (pe.contains("k")) c.pendulum.k = pe["k"].get<double>();
    if (pe.contains("torque_limit")) c.pendulum.torque_limit = pe["torque_limit"].get<double>();
    if (pe.contains("dt")) c.pendulum.dt = pe["dt"].get<double>();
    if (pe.contains("damping")) c.pendulum.damping = pe["damping"].get<double>();
  }
}

}  // namespace

ExperimentConfig default_config_for_preset(const std::string& preset) {
  ExperimentConfig c;
  c.preset = preset;
  // expansion degrees per preset follow the experiment settings
  if (preset == "single_room" || preset == "obstacle") {
    c.degree = 4;
    c.R = preset == "obstacle" ? 8 : 8;
  } else if (preset == "two_rooms") {
    c.degree = 5;
    c.R = 12;
  } else {
    c.degree = 2;
    c.R = 12;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  ExperimentConfig c;
  if (j.contains("preset")) c = default_config_for_preset(j["preset"].get<std::string>());
  config_from_json(j, c);
  return c;
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << config_to_json(cfg).dump(1) << "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : dump) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ModelBundle train_bundle(const ExperimentConfig& cfg, const TimeSeries& sensors,
                         const TimeSeries& controls) {
  if (sensors.len() < 3) throw std::invalid_argument("train: sensor series too short");
  ExpansionSpec spec = cfg.basis == "legendre"
                           ? ExpansionSpec::legendre_from_data(sensors, cfg.degree)
                           : ExpansionSpec::monomial(static_cast<int>(sensors.dim()), cfg.degree);
  const Eigen::Index n = spec.output_dim();

  // pass 1: mean of the expanded signal
  MeanAccumulator mean_acc(n);
  expand_through(sensors, spec, &mean_acc, nullptr);
  const Eigen::VectorXd mean = mean_acc.mean();

  // pass 2: covariance, derivative covariance and lagged moments
  LaggedMomentAccumulator acc(n, controls.dim(), cfg.p, cfg.q);
  acc.set_mean(mean);
  expand_through(sensors, spec, nullptr, &acc, &controls);

  SpheringTransform sphering = fit_sphering_from_stats(mean, acc.covariance(), cfg.eigen_floor);
  const Eigen::MatrixXd W = whitening_map(sphering);  // expanded_dim x rank
  const Eigen::Index nk = sphering.rank;

  // all training statistics live in the whitened coordinates y = W^T (h - m);
  // sandwiching the raw moments with W sidesteps the cancellation of forming
  // whitener * X * whitener on badly scaled expansions
  const auto sandwich = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return W.transpose() * x * W;
  };
  const Eigen::MatrixXd cov_y = sandwich(acc.covariance());
  const Eigen::MatrixXd dcov_y = sandwich(acc.derivative_covariance());

  PfaxMoments mom;
  mom.p = cfg.p;
  mom.q = cfg.q;
  mom.n = nk;
  mom.nu = controls.dim();
  mom.count = acc.target_count();
  mom.zz = sandwich(acc.lag(0, 0));
  mom.z_zeta.resize(nk, nk * cfg.p);
  mom.zeta_zeta.resize(nk * cfg.p, nk * cfg.p);
  mom.z_mu.resize(nk, mom.nu * cfg.q);
  mom.zeta_mu.resize(nk * cfg.p, mom.nu * cfg.q);
  mom.mu_mu.resize(mom.nu * cfg.q, mom.nu * cfg.q);
  for (int j = 1; j <= cfg.p; ++j)
    mom.z_zeta.middleCols((j - 1) * nk, nk) = sandwich(acc.lag(0, j));
  for (int j = 1; j <= cfg.p; ++j)
    for (int kk = 1; kk <= cfg.p; ++kk)
      mom.zeta_zeta.block((j - 1) * nk, (kk - 1) * nk, nk, nk) = sandwich(acc.lag(j, kk));
  for (int kk = 1; kk <= cfg.q; ++kk)
    mom.z_mu.middleCols((kk - 1) * mom.nu, mom.nu) = W.transpose() * acc.hu(0, kk);
  for (int j = 1; j <= cfg.p; ++j)
    for (int kk = 1; kk <= cfg.q; ++kk)
      mom.zeta_mu.block((j - 1) * nk, (kk - 1) * mom.nu, nk, mom.nu) =
          W.transpose() * acc.hu(j, kk);
  for (int j = 1; j <= cfg.q; ++j)
    for (int kk = 1; kk <= cfg.q; ++kk)
      mom.mu_mu.block((j - 1) * mom.nu, (kk - 1) * mom.nu, mom.nu, mom.nu) = acc.uu(j, kk);

  // deterministic signs: positive correlation with the time index over the
  // first tenth of training, evaluated through the composite extractor
  const auto sign_fix = [&](Eigen::MatrixXd& extraction) {
    const Eigen::Index window = std::max<Eigen::Index>(2, sensors.len() / 10);
    const Eigen::MatrixXd extractor = W * extraction;
    Eigen::VectorXd tsum = Eigen::VectorXd::Zero(extraction.cols());
    Eigen::VectorXd h(n);
    const double tmean = 0.5 * static_cast<double>(window - 1);
    for (Eigen::Index t = 0; t < window; ++t) {
      spec.expand_row(sensors.values.row(t).transpose(), h);
      const Eigen::VectorXd y = extractor.transpose() * (h - mean);
      tsum += (static_cast<double>(t) - tmean) * y;
    }
    for (Eigen::Index jcol = 0; jcol < extraction.cols(); ++jcol)
      if (tsum(jcol) < 0.0) extraction.col(jcol) = -extraction.col(jcol);
  };

  ModelBundle bundle;
  bundle.system = cfg.sensor;
  bundle.preset = cfg.sensor == "pendulum" ? "" : cfg.preset;
  bundle.pendulum = cfg.pendulum;
  bundle.expansion = spec;

  if (cfg.full_pfax) {
    // two-stage path: predictable pre-features first, then a linear SFA
    // decomposition of those features into slow mixtures
    const int r_pre = std::max(cfg.R, cfg.r);
    PfaxModel pfax = train_pfax_from_moments(mom, r_pre, cfg.eigen_floor);
    const Eigen::MatrixXd fcov = pfax.extraction.transpose() * cov_y * pfax.extraction;
    const Eigen::MatrixXd fdcov = pfax.extraction.transpose() * dcov_y * pfax.extraction;
    const SfaModel mix = train_sfa_from_stats(fcov, fdcov, cfg.R);
    Eigen::MatrixXd composite = pfax.extraction * mix.extraction;
    sign_fix(composite);  // flips are absorbed by the mixing stage
    bundle.pfax = std::move(pfax);
    bundle.pfax.extraction = feature_lift(sphering) * bundle.pfax.extraction;
    bundle.sfa_extraction = feature_lift(sphering) * composite;
    bundle.delta_values = mix.delta_values;
  } else {
    SfaModel core = train_sfa_from_stats(cov_y, dcov_y, cfg.R);
    sign_fix(core.extraction);
    bundle.delta_values = core.delta_values;
    bundle.pfax = proxy_from_sfa(core, mom, cfg.eigen_floor);
    bundle.sfa_extraction = feature_lift(sphering) * core.extraction;
    bundle.pfax.extraction = bundle.sfa_extraction;
  }
  bundle.sphering = std::move(sphering);

  // scale-free default theta: 5% of the RMS feature distance between
  // subsampled training states, applied to the squared distance
  {
    const Eigen::MatrixXd extractor = bundle.sphering.whitener * bundle.sfa_extraction;
    const Eigen::Index stride = std::max<Eigen::Index>(1, sensors.len() / 512);
    std::vector<Eigen::VectorXd> feats;
    Eigen::VectorXd h(n);
    for (Eigen::Index t = 0; t < sensors.len(); t += stride) {
      spec.expand_row(sensors.values.row(t).transpose(), h);
      feats.push_back(extractor.transpose() * (h - mean));
    }
    double sum = 0.0;
    long cnt = 0;
    for (size_t a = 0; a < feats.size(); ++a)
      for (size_t b = a + 1; b < feats.size(); b += 7) {
        sum += (feats[a] - feats[b]).squaredNorm();
        ++cnt;
      }
    const double rms2 = cnt ? sum / static_cast<double>(cnt) : 1.0;
    bundle.suggested_theta = 0.05 * 0.05 * rms2;
  }

  bundle.speed = cfg.speed > 0 ? cfg.speed : cfg.step_size;
  bundle.provenance.config_hash = config_hash(cfg);
  bundle.provenance.seed = cfg.seed;
  return bundle;
}

ModelBundle train_bundle_from_walk(const ExperimentConfig& cfg) {
  if (cfg.sensor == "pendulum") {
    const PendulumWalk walk = pendulum_random_walk(cfg.pendulum, cfg.steps, cfg.seed);
    return train_bundle(cfg, walk.states, walk.torques);
  }
  const Environment2D env = make_preset(cfg.preset);
  const Walk2D walk = random_walk(env, {cfg.steps, cfg.step_size, cfg.seed});
  const TimeSeries sensors = sense_series(env, walk.positions, cfg.sensor == "cartesian");
  return train_bundle(cfg, sensors, walk.controls);
}

NavigationConfig navigation_config_from(const ModelBundle& bundle, const ExperimentConfig& cfg) {
  NavigationConfig nav;
  nav.theta = cfg.theta > 0 ? cfg.theta : bundle.suggested_theta;
  nav.theta_tilde = cfg.theta_tilde > 0 ? cfg.theta_tilde : nav.theta / 10.0;
  nav.R = std::min<int>(cfg.R, static_cast<int>(bundle.sfa_extraction.cols()));
  nav.max_steps_total = cfg.max_steps;
  nav.progress_window = cfg.progress_window;
  nav.speed = cfg.speed > 0 ? cfg.speed : bundle.speed;
  return nav;
}

std::unique_ptr<ControlledSystem> make_system(const ModelBundle& bundle) {
  if (bundle.system == "pendulum") return std::make_unique<PendulumSystem>(bundle.pendulum);
  if (bundle.system == "cartesian")
    return std::make_unique<CartesianSystem>(make_preset(bundle.preset));
  return std::make_unique<WallSensorSystem>(make_preset(bundle.preset));
}

void write_feature_grid_csv(const ModelBundle& bundle, const Environment2D& env, int grid_n,
                            const std::string& path) {
  const SfaModel sfa = bundle.sfa_model();
  const Eigen::Index R = bundle.sfa_extraction.cols();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "gx,gy";
  for (Eigen::Index c = 0; c < R; ++c) out << ",c" << c;
  out << "\n";
  const Eigen::MatrixXd extractor = bundle.sphering.whitener * bundle.sfa_extraction;
  for (int iy = 0; iy < grid_n; ++iy) {
    for (int ix = 0; ix < grid_n; ++ix) {
      const Eigen::Vector2d p((ix + 0.5) / grid_n, (iy + 0.5) / grid_n);
      if (!env.is_interior(p, 1e-6)) continue;
      const Eigen::VectorXd sensor =
          bundle.system == "cartesian" ? Eigen::VectorXd(p) : wall_sensor(env, p).fractions;
      const Eigen::VectorXd g =
          extractor.transpose() * (bundle.expansion.expand_point(sensor) - bundle.sphering.mean);
      out << format_double(p.x()) << ',' << format_double(p.y());
      for (Eigen::Index c = 0; c < R; ++c) out << ',' << format_double(g(c));
      out << "\n";
    }
  }
}

void write_metrics(const Metrics& metrics, const std::string& path) {
  json j;
  for (const auto& [key, value] : metrics) j[key] = value;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(1) << "\n";
}

Metrics read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  in >> j;
  Metrics m;
  for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = it.value().get<double>();
  return m;
}

Metrics training_diagnostics(const ModelBundle& bundle, const TimeSeries& sensors,
                             const TimeSeries& controls) {
  const ExpansionSpec& spec = bundle.expansion;
  const Eigen::Index n = spec.output_dim();
  const Eigen::Index r = bundle.pfax.r();
  const Eigen::Index R = bundle.sfa_extraction.cols();
  const Eigen::MatrixXd model_extractor = bundle.sphering.whitener * bundle.pfax.extraction;
  const Eigen::MatrixXd goal_extractor = bundle.sphering.whitener * bundle.sfa_extraction;

  // stream goal features for the constraint suite and model features for the
  // predictor checks
  MeanAccumulator gmean(R);
  LaggedMomentAccumulator gstats(R, 0, 1, 1);
  gstats.set_mean(Eigen::VectorXd::Zero(R));
  LaggedMomentAccumulator fstats(r, controls.dim(), bundle.pfax.p, bundle.pfax.q);
  fstats.set_mean(Eigen::VectorXd::Zero(r));

  const Eigen::Index chunk_rows = 8192;
  Eigen::VectorXd row(n);
  for (Eigen::Index start = 0; start < sensors.len(); start += chunk_rows) {
    const Eigen::Index m = std::min(chunk_rows, sensors.len() - start);
    Eigen::MatrixXd hc(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      spec.expand_row(sensors.values.row(start + i).transpose(), row);
      hc.row(i) = (row - bundle.sphering.mean).transpose();
    }
    const Eigen::MatrixXd g = hc * goal_extractor;
    const Eigen::MatrixXd f = hc * model_extractor;
    gmean.add(g);
    gstats.add(g, Eigen::MatrixXd(m, 0));
    const Eigen::Index ustart = std::min(start, controls.len());
    const Eigen::Index um =
        std::max<Eigen::Index>(0, std::min(m, controls.len() - ustart));
    fstats.add(f, controls.values.middleRows(ustart, um));
  }

  Metrics out;
  const Eigen::VectorXd mean_g = gmean.mean();
  const Eigen::MatrixXd cov_g = gstats.covariance() - mean_g * mean_g.transpose();
  out["constraint_mean_max"] = mean_g.cwiseAbs().maxCoeff();
  out["constraint_var_err"] = (cov_g.diagonal().array() - 1.0).abs().maxCoeff();
  double corr_max = 0.0;
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index j = i + 1; j < R; ++j)
      corr_max = std::max(corr_max, std::abs(cov_g(i, j)) /
                                        std::sqrt(cov_g(i, i) * cov_g(j, j)));
  out["constraint_corr_max"] = corr_max;
  out["constraint_orth_err"] =
      (bundle.sfa_extraction.transpose() * bundle.sfa_extraction -
       Eigen::MatrixXd::Identity(R, R))
          .norm();

  const Eigen::VectorXd emp_delta = gstats.derivative_covariance().diagonal();
  double delta_err = 0.0;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(R, bundle.delta_values.size()); ++i)
    delta_err = std::max(delta_err, std::abs(emp_delta(i) - bundle.delta_values(i)) /
                                        std::max(bundle.delta_values(i), 1e-12));
  out["delta_rel_err"] = delta_err;

  // predictor checks in model-feature space (the projection of the z-space
  // moments is exact)
  PfaxMoments fm;
  fm.p = bundle.pfax.p;
  fm.q = bundle.pfax.q;
  fm.n = r;
  fm.nu = controls.dim();
  fm.count = fstats.target_count();
  fm.zz = fstats.lag(0, 0);
  fm.z_zeta.resize(r, r * fm.p);
  fm.zeta_zeta.resize(r * fm.p, r * fm.p);
  fm.z_mu.resize(r, fm.nu * fm.q);
  fm.zeta_mu.resize(r * fm.p, fm.nu * fm.q);
  fm.mu_mu.resize(fm.nu * fm.q, fm.nu * fm.q);
  for (int j = 1; j <= fm.p; ++j) fm.z_zeta.middleCols((j - 1) * r, r) = fstats.lag(0, j);
  for (int j = 1; j <= fm.p; ++j)
    for (int kk = 1; kk <= fm.p; ++kk)
      fm.zeta_zeta.block((j - 1) * r, (kk - 1) * r, r, r) = fstats.lag(j, kk);
  for (int kk = 1; kk <= fm.q; ++kk)
    fm.z_mu.middleCols((kk - 1) * fm.nu, fm.nu) = fstats.hu(0, kk);
  for (int j = 1; j <= fm.p; ++j)
    for (int kk = 1; kk <= fm.q; ++kk)
      fm.zeta_mu.block((j - 1) * r, (kk - 1) * fm.nu, r, fm.nu) = fstats.hu(j, kk);
  for (int j = 1; j <= fm.q; ++j)
    for (int kk = 1; kk <= fm.q; ++kk)
      fm.mu_mu.block((j - 1) * fm.nu, (kk - 1) * fm.nu, fm.nu, fm.nu) = fstats.uu(j, kk);

  const PredictorPair bu{bundle.pfax.B, bundle.pfax.U};
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(r, r);
  const Eigen::Vector2d res = stationarity_residuals(eye, bu, fm);
  out["stationarity_res_b"] = res(0);
  out["stationarity_res_u"] = res(1);

  const double resid_trace = residual_covariance(fm, bu).trace();
  out["pred_residual_trace"] = resid_trace;
  out["pred_residual_per_feature"] = resid_trace / static_cast<double>(r);

  // the same fit with the control signal withheld
  PfaxMoments fm_nou = fm;
  fm_nou.z_mu.setZero();
  fm_nou.zeta_mu.setZero();
  fm_nou.mu_mu.setZero();
  const PredictorPair bu_nou = fit_predictors(eye, fm_nou);
  out["pred_residual_trace_no_u"] = residual_covariance(fm_nou, bu_nou).trace();
  return out;
}

}  // namespace slownav
