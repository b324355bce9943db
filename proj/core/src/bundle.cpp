#include "slownav/bundle.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace slownav {
namespace {

using nlohmann::json;

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[static_cast<size_t>(i)][static_cast<size_t>(c)].get<double>();
  return m;
}

Eigen::VectorXd vec_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<size_t>(i)].get<double>();
  return v;
}

}  // namespace

SfaModel ModelBundle::sfa_model() const {
  SfaModel model;
  model.expansion = expansion;
  model.sphering = sphering;
  model.extraction = sfa_extraction;
  model.delta_values = delta_values;
  return model;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  json j;
  j["build_version"] = bundle.provenance.build_version;
  j["config_hash"] = bundle.provenance.config_hash;
  j["seed"] = bundle.provenance.seed;
  j["system"] = bundle.system;
  j["preset"] = bundle.preset;

  json exp;
  exp["basis"] = bundle.expansion.basis() == Basis::monomial ? "monomial" : "legendre";
  exp["degree"] = bundle.expansion.degree();
  exp["input_dim"] = bundle.expansion.input_dim();
  if (bundle.expansion.basis() == Basis::legendre) {
    exp["lower"] = to_json(bundle.expansion.lower());
    exp["upper"] = to_json(bundle.expansion.upper());
  }
  j["expansion"] = std::move(exp);

  json sph;
  sph["mean"] = to_json(bundle.sphering.mean);
  sph["whitener"] = to_json(bundle.sphering.whitener);
  j["sphering"] = std::move(sph);

  j["sfa_extraction"] = to_json(bundle.sfa_extraction);
  j["delta_values"] = to_json(bundle.delta_values);

  json pf;
  pf["extraction"] = to_json(bundle.pfax.extraction);
  pf["B"] = to_json(bundle.pfax.B);
  pf["U"] = to_json(bundle.pfax.U);
  pf["p"] = bundle.pfax.p;
  pf["q"] = bundle.pfax.q;
  pf["pfa_eigenvalues"] = to_json(bundle.pfax.pfa_eigenvalues);
  pf["proxy_mode"] = bundle.pfax.proxy_mode;
  j["pfax"] = std::move(pf);

  j["suggested_theta"] = bundle.suggested_theta;
  j["speed"] = bundle.speed;

  if (bundle.system == "pendulum") {
    json pe;
    pe["k"] = bundle.pendulum.k;
    pe["torque_limit"] = bundle.pendulum.torque_limit;
    pe["dt"] = bundle.pendulum.dt;
    pe["damping"] = bundle.pendulum.damping;
    j["pendulum"] = std::move(pe);
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json j;
  in >> j;

  ModelBundle b;
  b.provenance.build_version = j.at("build_version").get<std::string>();
  b.provenance.config_hash = j.at("config_hash").get<std::string>();
  b.provenance.seed = j.at("seed").get<std::uint64_t>();
  b.system = j.at("system").get<std::string>();
  b.preset = j.at("preset").get<std::string>();

  const json& exp = j.at("expansion");
  const std::string basis = exp.at("basis").get<std::string>();
  const int degree = exp.at("degree").get<int>();
  const int input_dim = exp.at("input_dim").get<int>();
  if (basis == "monomial") {
    b.expansion = ExpansionSpec::monomial(input_dim, degree);
  } else {
    b.expansion = ExpansionSpec::legendre(input_dim, degree, vec_from_json(exp.at("lower")),
                                          vec_from_json(exp.at("upper")));
  }

  b.sphering.mean = vec_from_json(j.at("sphering").at("mean"));
  b.sphering.whitener = mat_from_json(j.at("sphering").at("whitener"));

  b.sfa_extraction = mat_from_json(j.at("sfa_extraction"));
  b.delta_values = vec_from_json(j.at("delta_values"));

  const json& pf = j.at("pfax");
  b.pfax.extraction = mat_from_json(pf.at("extraction"));
  b.pfax.B = mat_from_json(pf.at("B"));
  b.pfax.U = mat_from_json(pf.at("U"));
  b.pfax.p = pf.at("p").get<int>();
  b.pfax.q = pf.at("q").get<int>();
  b.pfax.pfa_eigenvalues = vec_from_json(pf.at("pfa_eigenvalues"));
  b.pfax.proxy_mode = pf.at("proxy_mode").get<bool>();

  b.suggested_theta = j.at("suggested_theta").get<double>();
  b.speed = j.at("speed").get<double>();

  if (j.contains("pendulum")) {
    const json& pe = j.at("pendulum");
    b.pendulum.k = pe.at("k").get<double>();
    b.pendulum.torque_limit = pe.at("torque_limit").get<double>();
    b.pendulum.dt = pe.at("dt").get<double>();
    b.pendulum.damping = pe.at("damping").get<double>();
  }
  return b;
}

}  // namespace slownav
