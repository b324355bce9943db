#pragma once

#include <cstdint>
#include <string>

#include "slownav/expansion.hpp"
#include "slownav/pendulum.hpp"
#include "slownav/pfax.hpp"
#include "slownav/sfa.hpp"
#include "slownav/sphering.hpp"

namespace slownav {

inline constexpr const char* kBuildVersion = "0.1.0";

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string build_version = kBuildVersion;
};

// Everything needed to evaluate features and navigate: the expansion and
// sphering stages, the slow-feature extraction, and the prediction model.
// Saving a loaded bundle reproduces the file byte for byte.
struct ModelBundle {
  std::string system = "wall";  // wall | cartesian | pendulum
  std::string preset;           // environment preset (empty for pendulum)
  ExpansionSpec expansion;
  SpheringTransform sphering;
  Eigen::MatrixXd sfa_extraction;  // expanded_dim x R
  Eigen::VectorXd delta_values;
  PfaxModel pfax;
  double suggested_theta = 0.0;
  double speed = 0.0;
  PendulumConfig pendulum;
  Provenance provenance;

  SfaModel sfa_model() const;
};

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

}  // namespace slownav
