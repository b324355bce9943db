#pragma once

#include <optional>

#include <Eigen/Core>

#include "slownav/expansion.hpp"
#include "slownav/sphering.hpp"
#include "slownav/time_series.hpp"

namespace slownav {

// Linear SFA model. The extraction columns are eigenvectors of the
// derivative covariance <dz dz^T> for the smallest eigenvalues; the
// delta_values are those eigenvalues (mean squared temporal derivative of
// each output), nondecreasing. When the model was trained through the full
// pipeline, expansion and sphering are present and extraction applies to
// raw sensor values; otherwise input is taken as already sphered.
struct SfaModel {
  std::optional<ExpansionSpec> expansion;
  std::optional<SpheringTransform> sphering;
  Eigen::MatrixXd extraction;    // sphered_dim x r, orthonormal columns
  Eigen::VectorXd delta_values;  // ascending

  Eigen::Index r() const { return extraction.cols(); }
};

// Trains on an already-sphered series. Components with (numerically) zero
// variance in z are excluded from the solve; if fewer than r informative
// directions remain, this throws. Signs are fixed so each output positively
// correlates with the time index over the first tenth of training.
SfaModel train_sfa(const TimeSeries& sphered, int r);

// Same solve from precomputed statistics (streaming path): cov is the
// covariance of z over training, dcov the covariance of its forward
// differences. Sign fixing is left to the caller.
SfaModel train_sfa_from_stats(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& dcov, int r);

// Full pipeline: expand, sphere, train. Keeps the pipeline pieces in the model.
SfaModel train_sfa_pipeline(const TimeSeries& raw, const ExpansionSpec& spec, int r,
                            double eigen_floor = kDefaultEigenFloor);

// expand -> sphere -> project (the expansion/sphering stages are skipped when
// the model lacks them)
TimeSeries sfa_extract(const SfaModel& model, const TimeSeries& raw);
Eigen::VectorXd sfa_extract_point(const SfaModel& model, const Eigen::VectorXd& raw);

// Empirical slowness of each column of a signal: mean squared forward
// difference.
Eigen::VectorXd empirical_delta(const TimeSeries& signal);

}  // namespace slownav
