#include "slownav/sphering.hpp"

#include <cmath>
#include <stdexcept>

namespace slownav {

SpheringTransform fit_sphering_from_stats(const Eigen::VectorXd& mean,
                                          const Eigen::MatrixXd& covariance,
                                          double eigen_floor) {
  if (!mean.allFinite() || !covariance.allFinite())
    throw std::invalid_argument("sphering: non-finite statistics");
  const Eigen::Index n = covariance.rows();

  // Equilibrate before the eigensolve: expanded features can span dozens of
  // orders of magnitude (high-degree monomials), which both wrecks the
  // accuracy of small eigenpairs and makes a raw relative floor cut away
  // informative directions. The floor is applied to the spectrum of the
  // correlation matrix, a scale-free notion of redundancy.
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i)
    scale(i) = covariance(i, i) > 0 ? std::sqrt(covariance(i, i)) : 1.0;
  const Eigen::MatrixXd corr =
      scale.cwiseInverse().asDiagonal() * covariance * scale.cwiseInverse().asDiagonal();

  const EigenDecomposition d = symmetric_eig_ascending(corr);
  const double lam_max = d.values.size() ? d.values.maxCoeff() : 0.0;
  if (lam_max <= 0.0) throw std::invalid_argument("sphering: zero variance");
  // the reference level is the mean correlation eigenvalue (trace / n = 1 for
  // any correlation matrix), which keeps the cut independent of dimension
  const double floor = eigen_floor * corr.trace() / static_cast<double>(n);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d.values.size(); ++i)
    if (d.values(i) > floor) ++rank;
  if (rank == 0) throw std::invalid_argument("sphering: zero variance");

  // first-stage map from the equilibrated spectrum, then an exact
  // re-whitening against the raw covariance: the kept directions are not
  // quite orthogonal to the discarded ones in the raw metric, and the
  // residue matters when kept variances sit below the discarded energy
  const Eigen::MatrixXd w0 = scale.cwiseInverse().asDiagonal() * d.vectors.rightCols(rank) *
                             d.values.tail(rank).cwiseSqrt().cwiseInverse().asDiagonal();
  const Eigen::MatrixXd cy = w0.transpose() * covariance * w0;  // ~ identity
  const EigenDecomposition cyd = symmetric_eig_ascending(cy);
  if (cyd.values(0) <= 0.0) throw std::invalid_argument("sphering: covariance not positive");
  const Eigen::MatrixXd sy = cyd.vectors *
                             cyd.values.cwiseSqrt().cwiseInverse().asDiagonal() *
                             cyd.vectors.transpose();

  SpheringTransform t;
  t.mean = mean;
  t.rank = rank;
  t.map = w0 * sy;  // W^T C W = I to machine precision

  // Whitener from the SVD of the map: with W = V S' U'^T and W^T C W = I,
  // the columns of V are covariance eigendirections with eigenvalues
  // 1 / s'^2, the symmetric whitener is V diag(s') V^T, and the orthonormal
  // lift V U'^T carries fitted coefficients into its coordinates.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t.map, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();  // descending
  t.kept_basis.resize(n, rank);
  t.kept_eigenvalues.resize(rank);
  Eigen::MatrixXd u_rot(rank, rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    t.kept_basis.col(i) = svd.matrixU().col(i);
    u_rot.col(i) = svd.matrixV().col(i);
  }
  for (Eigen::Index i = 0; i < rank; ++i)
    t.kept_eigenvalues(i) = 1.0 / (s(i) * s(i));  // ascending
  t.whitener = t.kept_basis * s.asDiagonal() * t.kept_basis.transpose();
  t.lift = t.kept_basis * u_rot.transpose();
  return t;
}

SpheringTransform fit_sphering(const TimeSeries& series, double eigen_floor) {
  if (!series.all_finite()) throw std::invalid_argument("sphering: non-finite input");
  if (series.len() < series.dim() + 1)
    throw std::invalid_argument("sphering: need len >= dim + 1");
  const Eigen::VectorXd mean = series.values.colwise().mean().transpose();
  const Eigen::MatrixXd centered = series.values.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(series.len());
  return fit_sphering_from_stats(mean, cov, eigen_floor);
}

TimeSeries apply_sphering(const SpheringTransform& t, const TimeSeries& series) {
  if (series.dim() != t.expanded_dim())
    throw std::invalid_argument("sphering: dimension mismatch");
  TimeSeries out;
  out.values = (series.values.rowwise() - t.mean.transpose()) * t.whitener;
  return out;
}

Eigen::VectorXd apply_sphering(const SpheringTransform& t, const Eigen::VectorXd& point) {
  if (point.size() != t.expanded_dim())
    throw std::invalid_argument("sphering: dimension mismatch");
  return t.whitener * (point - t.mean);
}

}  // namespace slownav
