#include "slownav/control.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace slownav {
namespace {

struct Secular {
  const Eigen::VectorXd& d;
  const Eigen::VectorXd& beta;

  // phi(lambda) = sum beta_i^2 / (d_i - lambda)^2 and its derivative
  double phi(double lam, double* dphi = nullptr) const {
    double sum = 0.0, dsum = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (beta(i) == 0.0) continue;
      const double den = d(i) - lam;
      const double w = beta(i) / den;
      sum += w * w;
      dsum += 2.0 * w * w / den;
    }
    if (dphi) *dphi = dsum;
    return sum;
  }
};

Eigen::VectorXd coefficients_at(const Eigen::VectorXd& d, const Eigen::VectorXd& beta,
                                double lam) {
  Eigen::VectorXd w(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    w(i) = beta(i) == 0.0 ? 0.0 : beta(i) / (d(i) - lam);
  return w;
}

}  // namespace

ControlProblem assemble_control_problem_features(const PfaxModel& pfax,
                                                 const Eigen::MatrixXd& a_sfa,
                                                 const Eigen::VectorXd& goal,
                                                 const Eigen::VectorXd& feature_zeta_next,
                                                 const Eigen::VectorXd& u_recent,
                                                 std::optional<double> norm_c) {
  const Eigen::Index r = pfax.r();
  const Eigen::Index nu = pfax.nu();
  if (a_sfa.rows() != r)
    throw std::invalid_argument("assemble_control_problem: a_sfa row count mismatch");
  if (goal.size() != a_sfa.cols())
    throw std::invalid_argument("assemble_control_problem: goal dimension mismatch");
  if (feature_zeta_next.size() != r * pfax.p)
    throw std::invalid_argument("assemble_control_problem: missing state history");
  if (u_recent.size() != nu * (pfax.q - 1))
    throw std::invalid_argument("assemble_control_problem: missing control history");

  // prediction of the next features with u(t) = 0
  Eigen::VectorXd pred = pfax.B * feature_zeta_next;
  for (int j = 2; j <= pfax.q; ++j)
    pred.noalias() += pfax.U.middleCols((j - 1) * nu, nu) * u_recent.segment((j - 2) * nu, nu);

  ControlProblem p;
  p.u_star = goal - a_sfa.transpose() * pred;
  p.u_tilde1 = a_sfa.transpose() * pfax.U.leftCols(nu);
  p.norm_c = norm_c;
  if (norm_c && !(*norm_c > 0)) throw std::invalid_argument("control: speed must be positive");
  return p;
}

ControlProblem assemble_control_problem(const PfaxModel& pfax, const Eigen::MatrixXd& a_sfa,
                                        const Eigen::VectorXd& goal,
                                        const Eigen::VectorXd& zeta_next,
                                        const Eigen::VectorXd& u_recent,
                                        std::optional<double> norm_c) {
  const Eigen::Index n = pfax.extraction.rows();
  if (zeta_next.size() != n * pfax.p)
    throw std::invalid_argument("assemble_control_problem: zeta width mismatch");
  Eigen::VectorXd fz(pfax.r() * pfax.p);
  for (int j = 0; j < pfax.p; ++j)
    fz.segment(j * pfax.r(), pfax.r()) =
        pfax.extraction.transpose() * zeta_next.segment(j * n, n);
  return assemble_control_problem_features(pfax, a_sfa, goal, fz, u_recent, norm_c);
}

Eigen::VectorXd solve_unconstrained(const ControlProblem& p) {
  const Eigen::MatrixXd h = p.u_tilde1.transpose() * p.u_tilde1;
  const Eigen::VectorXd b = p.u_tilde1.transpose() * p.u_star;
  return thresholded_pseudo_inverse(h) * b;
}

Eigen::VectorXd solve_norm_constrained(const ControlProblem& p) {
  if (!p.norm_c) throw std::invalid_argument("solve_norm_constrained: no norm set");
  const double c = *p.norm_c;
  if (!(c > 0)) throw std::invalid_argument("solve_norm_constrained: c must be positive");

  const Eigen::MatrixXd h = p.u_tilde1.transpose() * p.u_tilde1;
  const Eigen::VectorXd b = p.u_tilde1.transpose() * p.u_star;
  const EigenDecomposition ed = symmetric_eig_ascending(h);
  const Eigen::VectorXd& d = ed.values;
  const Eigen::VectorXd beta = ed.vectors.transpose() * b;
  const Eigen::Index nu = d.size();
  const double d0 = d(0);
  const double bnorm = beta.norm();
  const double dscale = std::max({1.0, std::abs(d0), std::abs(d(nu - 1))});
  const double cluster_tol = 1e-11 * dscale;
  const double beta_tol = 1e-13 * bnorm;

  // split the smallest-eigenvalue cluster from the rest
  bool cluster_excited = false;
  double fixed2 = 0.0;
  for (Eigen::Index i = 0; i < nu; ++i) {
    if (d(i) - d0 <= cluster_tol) {
      if (std::abs(beta(i)) > beta_tol) cluster_excited = true;
    } else {
      const double w = beta(i) / (d(i) - d0);
      fixed2 += w * w;
    }
  }

  if (bnorm == 0.0 || (!cluster_excited && fixed2 < c * c)) {
    // degenerate (hard) case: the boundary solution at lambda = d_min, topped
    // up along the first eigendirection of the minimal cluster
    Eigen::VectorXd w(nu);
    for (Eigen::Index i = 0; i < nu; ++i)
      w(i) = (d(i) - d0 <= cluster_tol) ? 0.0 : beta(i) / (d(i) - d0);
    const double t2 = std::max(0.0, c * c - w.squaredNorm());
    Eigen::VectorXd u = ed.vectors * w + std::sqrt(t2) * ed.vectors.col(0);
    const double norm = u.norm();
    return norm > 0 ? Eigen::VectorXd(u * (c / norm)) : u;
  }

  // secular equation phi(lambda) = c^2 on the monotone branch lambda < d_min;
  // phi increases toward d_min, and d_min - lambda* <= ||b|| / c bounds the root
  const Secular sec{d, beta};
  double lo = d0 - bnorm / c - 1e-3 * dscale;
  double hi = d0;
  for (int expand = 0; expand < 200 && sec.phi(lo) > c * c; ++expand)
    lo = d0 - 2.0 * (d0 - lo);

  const double tol = 1e-12 * c * c;
  double lam = d0 - bnorm / c;
  if (!(lam > lo && lam < hi)) lam = 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    double dphi = 0.0;
    const double val = sec.phi(lam, &dphi);
    if (std::isfinite(val) && std::abs(val - c * c) <= tol) {
      converged = true;
      break;
    }
    if (!std::isfinite(val) || val > c * c)
      hi = lam;
    else
      lo = lam;
    double next = lam;
    if (std::isfinite(val) && dphi > 0.0) {
      // Newton on g = 1/sqrt(phi) - 1/c, which is nearly linear in lambda;
      // g' = -dphi / (2 phi^{3/2})
      const double g = 1.0 / std::sqrt(val) - 1.0 / c;
      const double gp = 0.5 * dphi / (val * std::sqrt(val));
      next = lam + g / gp;
    }
    lam = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }
  if (!converged) {
    for (int it = 0; it < 2000; ++it) {
      lam = 0.5 * (lo + hi);
      const double val = sec.phi(lam);
      if (std::isfinite(val) && std::abs(val - c * c) <= tol) break;
      if (!std::isfinite(val) || val > c * c)
        hi = lam;
      else
        lo = lam;
      if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)))
        break;
    }
  }

  Eigen::VectorXd u = ed.vectors * coefficients_at(d, beta, lam);
  const double norm = u.norm();
  if (norm > 0) u *= c / norm;
  return u;
}

double control_objective(const ControlProblem& p, const Eigen::VectorXd& u) {
  return (p.u_star - p.u_tilde1 * u).squaredNorm();
}

}  // namespace slownav
