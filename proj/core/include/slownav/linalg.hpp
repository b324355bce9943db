#pragma once

#include <Eigen/Dense>

namespace slownav {

// Relative eigenvalue floor used wherever a matrix inverse appears.
inline constexpr double kDefaultEigenFloor = 1e-8;

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns, canonical signs
};

// Symmetric eigendecomposition, eigenvalues ascending. The input is
// symmetrized as (m + m^T)/2 first to absorb floating-point asymmetry.
// Each eigenvector is sign-fixed so that its largest-magnitude entry is
// positive, which makes repeated runs reproducible.
EigenDecomposition symmetric_eig_ascending(const Eigen::MatrixXd& m);

// Pseudo-inverse of a symmetric matrix: eigenvalues with |lambda| below
// rel_eps * max|lambda| are projected away, the rest are inverted.
// The zero matrix maps to the zero matrix.
Eigen::MatrixXd thresholded_pseudo_inverse(const Eigen::MatrixXd& m,
                                           double rel_eps = kDefaultEigenFloor);

// I_p (x) M, the block-diagonal matrix with p copies of M.
Eigen::MatrixXd block_diag_lift(const Eigen::MatrixXd& m, int p);

}  // namespace slownav
