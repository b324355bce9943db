#pragma once

#include <Eigen/Core>

#include "slownav/linalg.hpp"
#include "slownav/time_series.hpp"

namespace slownav {

// Affine transform mapping the expanded signal to zero mean and unit
// covariance: z = S (h - mean) with S the symmetric inverse square root of
// the centered covariance. Covariance eigenvalues below eigen_floor times
// the largest are zeroed, so rank-deficient directions are projected away
// rather than amplified.
struct SpheringTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd whitener;  // symmetric PSD

  // training-time byproducts (not serialized):
  Eigen::MatrixXd kept_basis;       // expanded_dim x rank, orthonormal
  Eigen::VectorXd kept_eigenvalues; // covariance eigenvalues of the kept directions
  Eigen::MatrixXd map;              // W: y = W^T (h - mean) has exact unit covariance
  Eigen::MatrixXd lift;             // orthonormal; whitener * (lift * w) == W * w
  Eigen::Index rank = 0;

  Eigen::Index expanded_dim() const { return mean.size(); }
};

SpheringTransform fit_sphering(const TimeSeries& series,
                               double eigen_floor = kDefaultEigenFloor);

// Same fit from precomputed statistics (streaming path).
SpheringTransform fit_sphering_from_stats(const Eigen::VectorXd& mean,
                                          const Eigen::MatrixXd& covariance,
                                          double eigen_floor = kDefaultEigenFloor);

// Rectangular map W with W^T (h - mean) the whitened coordinates restricted
// to the kept directions (expanded_dim x rank). Training works in these
// coordinates: sandwiching the raw moment matrices with W avoids the
// catastrophic cancellation of forming whitener * X * whitener on badly
// scaled expansions. Extraction vectors fitted in these coordinates are
// carried into the whitener's own coordinates by the orthonormal lift.
inline const Eigen::MatrixXd& whitening_map(const SpheringTransform& t) { return t.map; }
inline const Eigen::MatrixXd& feature_lift(const SpheringTransform& t) { return t.lift; }

TimeSeries apply_sphering(const SpheringTransform& t, const TimeSeries& series);
Eigen::VectorXd apply_sphering(const SpheringTransform& t, const Eigen::VectorXd& point);

}  // namespace slownav
