#include "slownav/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace slownav {

EigenDecomposition symmetric_eig_ascending(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix not square");
  if (!m.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed");
  EigenDecomposition d;
  d.values = solver.eigenvalues();
  d.vectors = solver.eigenvectors();
  for (Eigen::Index j = 0; j < d.vectors.cols(); ++j) {
    Eigen::Index imax = 0;
    d.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (d.vectors(imax, j) < 0.0) d.vectors.col(j) = -d.vectors.col(j);
  }
  return d;
}

Eigen::MatrixXd thresholded_pseudo_inverse(const Eigen::MatrixXd& m, double rel_eps) {
  const EigenDecomposition d = symmetric_eig_ascending(m);
  const double lam_max = d.values.size() ? d.values.cwiseAbs().maxCoeff() : 0.0;
  if (lam_max == 0.0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  const double floor = rel_eps * lam_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(d.values.size());
  for (Eigen::Index i = 0; i < d.values.size(); ++i)
    if (std::abs(d.values(i)) >= floor) inv(i) = 1.0 / d.values(i);
  return d.vectors * inv.asDiagonal() * d.vectors.transpose();
}

Eigen::MatrixXd block_diag_lift(const Eigen::MatrixXd& m, int p) {
  if (p < 1) throw std::invalid_argument("lift count must be >= 1");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows() * p, m.cols() * p);
  for (int i = 0; i < p; ++i)
    out.block(i * m.rows(), i * m.cols(), m.rows(), m.cols()) = m;
  return out;
}

}  // namespace slownav
