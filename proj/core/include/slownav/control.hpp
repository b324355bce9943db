#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "slownav/pfax.hpp"

namespace slownav {

// One-step control problem: minimize ||u_star - u_tilde1 * u||^2, either
// freely or on the sphere ||u|| = c.
struct ControlProblem {
  Eigen::MatrixXd u_tilde1;       // goal_dim x n_u
  Eigen::VectorXd u_star;         // goal_dim
  std::optional<double> norm_c;   // agent speed, when the step length is fixed
};

// Assembles u_star and u_tilde1 for the prediction model. zeta_next holds
// vec(z(t), ..., z(t-p+1)) in z-space; u_recent holds the q-1 most recent
// controls u(t-1), ..., u(t-q+1), most recent first. a_sfa maps model
// features to goal features (identity recovers the plain setting).
ControlProblem assemble_control_problem(const PfaxModel& pfax, const Eigen::MatrixXd& a_sfa,
                                        const Eigen::VectorXd& goal,
                                        const Eigen::VectorXd& zeta_next,
                                        const Eigen::VectorXd& u_recent,
                                        std::optional<double> norm_c = std::nullopt);

// Same assembly from feature-space histories vec(m(t), ..., m(t-p+1)).
ControlProblem assemble_control_problem_features(const PfaxModel& pfax,
                                                 const Eigen::MatrixXd& a_sfa,
                                                 const Eigen::VectorXd& goal,
                                                 const Eigen::VectorXd& feature_zeta_next,
                                                 const Eigen::VectorXd& u_recent,
                                                 std::optional<double> norm_c = std::nullopt);

// Minimum-norm least-squares minimizer (thresholded pseudo-inverse of the
// normal equations).
Eigen::VectorXd solve_unconstrained(const ControlProblem& p);

// Global minimizer on the sphere ||u|| = c via the secular equation of the
// inhomogeneous eigenvalue problem; the degenerate (hard) case picks the
// first eigendirection of the smallest eigenvalue cluster with positive
// sign. Newton iterations with a bisection fallback on the monotone branch.
Eigen::VectorXd solve_norm_constrained(const ControlProblem& p);

// ||u_star - u_tilde1 u||^2
double control_objective(const ControlProblem& p, const Eigen::VectorXd& u);

}  // namespace slownav
