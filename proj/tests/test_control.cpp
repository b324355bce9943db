#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slownav/control.hpp"
#include "slownav/rng.hpp"

using namespace slownav;

namespace {

// brute-force oracle: scan the sphere ||u|| = c for the smallest objective
double sphere_scan_2d(const ControlProblem& p, double c, long rays = 200000) {
  double best = std::numeric_limits<double>::infinity();
  for (long i = 0; i < rays; ++i) {
    const double a = 2.0 * std::numbers::pi * i / rays;
    Eigen::Vector2d u(c * std::cos(a), c * std::sin(a));
    best = std::min(best, control_objective(p, u));
  }
  return best;
}

double sphere_scan_3d(const ControlProblem& p, double c, long points = 120000) {
  // Fibonacci sphere
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  double best = std::numeric_limits<double>::infinity();
  for (long i = 0; i < points; ++i) {
    const double y = 1.0 - 2.0 * (i + 0.5) / points;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double a = golden * i;
    Eigen::Vector3d u(c * r * std::cos(a), c * y, c * r * std::sin(a));
    best = std::min(best, control_objective(p, u));
  }
  return best;
}

ControlProblem random_problem(SplitMix64& rng, int rows, int cols, double c) {
  ControlProblem p;
  p.u_tilde1.resize(rows, cols);
  p.u_star.resize(rows);
  for (int i = 0; i < rows; ++i) {
    p.u_star(i) = rng.normal();
    for (int j = 0; j < cols; ++j) p.u_tilde1(i, j) = rng.normal();
  }
  p.norm_c = c;
  return p;
}

}  // namespace

TEST_CASE("unconstrained solve hits the exact minimizer") {
  SplitMix64 rng(1);

  SUBCASE("square invertible system has zero residual") {
    ControlProblem p = random_problem(rng, 3, 3, 1.0);
    p.norm_c.reset();
    const Eigen::VectorXd u = solve_unconstrained(p);
    CHECK((p.u_star - p.u_tilde1 * u).norm() <= 1e-10);
  }

  SUBCASE("zero map returns the minimum-norm zero") {
    ControlProblem p;
    p.u_tilde1 = Eigen::MatrixXd::Zero(2, 2);
    p.u_star = Eigen::Vector2d(1.0, -2.0);
    CHECK(solve_unconstrained(p).norm() == 0.0);
  }

  SUBCASE("overdetermined system matches the normal equations") {
    ControlProblem p = random_problem(rng, 3, 2, 1.0);
    p.norm_c.reset();
    const Eigen::VectorXd u = solve_unconstrained(p);
    const Eigen::MatrixXd h = p.u_tilde1.transpose() * p.u_tilde1;
    const Eigen::VectorXd oracle = h.ldlt().solve(p.u_tilde1.transpose() * p.u_star);
    CHECK((u - oracle).norm() <= 1e-9);
  }
}

TEST_CASE("constrained solve agrees with the unconstrained one at norm c") {
  SplitMix64 rng(2);
  ControlProblem p = random_problem(rng, 2, 2, 1.0);
  Eigen::Vector2d u0(0.6, -0.8);  // unit norm
  p.u_star = p.u_tilde1 * u0;
  p.norm_c = 1.0;
  const Eigen::VectorXd u = solve_norm_constrained(p);
  CHECK((u - u0).norm() <= 1e-9);
}

TEST_CASE("projection example: identity map, off-sphere target") {
  ControlProblem p;
  p.u_tilde1 = Eigen::MatrixXd::Identity(2, 2);
  p.u_star = Eigen::Vector2d(2.0, 0.0);
  p.norm_c = 1.0;
  const Eigen::VectorXd u = solve_norm_constrained(p);
  CHECK((u - Eigen::Vector2d(1.0, 0.0)).norm() <= 1e-9);
}

TEST_CASE("constrained solutions are globally optimal on the sphere") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const double c = 0.5 + rng.next_double();
    ControlProblem p = random_problem(rng, 2 + static_cast<int>(rng.next_u64() % 2), 2, c);
    const Eigen::VectorXd u = solve_norm_constrained(p);
    CHECK(std::abs(u.norm() - c) <= 1e-9 * c);
    const double mine = control_objective(p, u);
    const double scan = sphere_scan_2d(p, c);
    CHECK(mine <= scan + 1e-6 * std::max(1.0, scan));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const double c = 0.5 + rng.next_double();
    ControlProblem p = random_problem(rng, 3, 3, c);
    const Eigen::VectorXd u = solve_norm_constrained(p);
    CHECK(std::abs(u.norm() - c) <= 1e-9 * c);
    const double mine = control_objective(p, u);
    const double scan = sphere_scan_3d(p, c);
    CHECK(mine <= scan + 1e-6 * std::max(1.0, scan));
  }
}

TEST_CASE("rank-deficient maps fall into the deterministic hard case") {
  ControlProblem p;
  p.u_tilde1.resize(2, 2);
  p.u_tilde1 << 0.0, 0.0, 0.0, 1.0;  // null direction e1
  p.u_star = Eigen::Vector2d(0.7, 0.1);
  p.norm_c = 1.0;
  const Eigen::VectorXd u = solve_norm_constrained(p);
  CHECK(std::abs(u.norm() - 1.0) <= 1e-9);
  CHECK(u(1) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(u(0) == doctest::Approx(std::sqrt(1.0 - 0.01)).epsilon(1e-9));  // positive sign
  const double scan = sphere_scan_2d(p, 1.0);
  CHECK(control_objective(p, u) <= scan + 1e-6);

  SUBCASE("the all-zero problem still returns a deterministic unit step") {
    ControlProblem z;
    z.u_tilde1 = Eigen::MatrixXd::Zero(2, 2);
    z.u_star = Eigen::Vector2d::Zero();
    z.norm_c = 2.0;
    const Eigen::VectorXd uz = solve_norm_constrained(z);
    CHECK(std::abs(uz.norm() - 2.0) <= 1e-9);
    const Eigen::VectorXd uz2 = solve_norm_constrained(z);
    CHECK((uz - uz2).norm() == 0.0);
  }
}

TEST_CASE("minimizing the distance and its square give the same control") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    ControlProblem p = random_problem(rng, 2, 2, 1.0);
    const Eigen::VectorXd u = solve_norm_constrained(p);
    // scan the unsquared objective as well
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2d argbest;
    for (long i = 0; i < 100000; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 100000;
      const Eigen::Vector2d cand(std::cos(a), std::sin(a));
      const double val = std::sqrt(control_objective(p, cand));
      if (val < best) {
        best = val;
        argbest = cand;
      }
    }
    CHECK((u - argbest).norm() <= 1e-3);  // within the scan resolution
  }
}

TEST_CASE("problem assembly follows the printed control setting") {
  // small hand-checkable model: r = 2, p = 1, q = 2, scalar control
  PfaxModel model;
  model.extraction = Eigen::MatrixXd::Identity(2, 2);
  model.p = 1;
  model.q = 2;
  model.B.resize(2, 2);
  model.B << 0.5, 0.1, -0.2, 0.8;
  model.U.resize(2, 2);  // (U1 U2), n_u = 1
  model.U << 0.3, -0.4, 0.6, 0.2;
  model.pfa_eigenvalues = Eigen::VectorXd::Zero(2);

  const Eigen::Vector2d m_star(1.0, -1.0);
  const Eigen::Vector2d fz(0.2, 0.4);     // m(t)
  Eigen::VectorXd u_prev(1);
  u_prev << 0.7;                          // u(t-1)
  const Eigen::MatrixXd a_sfa = Eigen::MatrixXd::Identity(2, 2);

  const ControlProblem p =
      assemble_control_problem_features(model, a_sfa, m_star, fz, u_prev, 0.5);

  // by hand: prediction without u(t) is B m(t) + U2 u(t-1)
  Eigen::Vector2d pred = model.B * fz + model.U.col(1) * 0.7;
  CHECK((p.u_star - (m_star - pred)).norm() <= 1e-15);
  CHECK((p.u_tilde1 - model.U.col(0)).norm() <= 1e-15);

  SUBCASE("a_sfa = I reduces to the original setting") {
    CHECK((p.u_tilde1 - model.U.leftCols(1)).norm() == 0.0);
  }

  SUBCASE("row selection restricts the goal space") {
    Eigen::MatrixXd sel(2, 1);
    sel << 1.0, 0.0;
    const ControlProblem q2 = assemble_control_problem_features(
        model, sel, m_star.head(1), fz, u_prev, 0.5);
    CHECK(q2.u_star.size() == 1);
    CHECK(q2.u_star(0) == doctest::Approx(p.u_star(0)));
    CHECK(q2.u_tilde1(0, 0) == doctest::Approx(p.u_tilde1(0, 0)));
  }
}

TEST_CASE("the model's own prediction is a fixed point of the control") {
  PfaxModel model;
  model.extraction = Eigen::MatrixXd::Identity(2, 2);
  model.p = 1;
  model.q = 1;
  model.B.resize(2, 2);
  model.B << 0.9, 0.0, 0.1, 0.7;
  model.U.resize(2, 2);
  model.U << 0.5, 0.0, 0.0, 0.5;
  model.pfa_eigenvalues = Eigen::VectorXd::Zero(2);

  const Eigen::Vector2d fz(0.3, -0.6);
  const Eigen::VectorXd u_prev(0);  // q = 1: empty history
  const Eigen::Vector2d own_prediction = model.B * fz;  // u(t) = 0

  const ControlProblem p = assemble_control_problem_features(
      model, Eigen::MatrixXd::Identity(2, 2), own_prediction, fz, u_prev);
  CHECK(solve_unconstrained(p).norm() <= 1e-9);
}

TEST_CASE("z-space and feature-space assembly agree") {
  SplitMix64 rng(7);
  PfaxModel model;
  model.extraction.resize(4, 2);
  for (Eigen::Index i = 0; i < model.extraction.size(); ++i)
    model.extraction.data()[i] = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(model.extraction);
  model.extraction = qr.householderQ() * Eigen::MatrixXd::Identity(4, 2);
  model.p = 2;
  model.q = 1;
  model.B.resize(2, 4);
  model.U.resize(2, 2);
  for (Eigen::Index i = 0; i < model.B.size(); ++i) model.B.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < model.U.size(); ++i) model.U.data()[i] = rng.normal();
  model.pfa_eigenvalues = Eigen::VectorXd::Zero(2);

  Eigen::VectorXd zeta(8), goal(2);
  for (int i = 0; i < 8; ++i) zeta(i) = rng.normal();
  goal << 0.4, -0.2;
  const Eigen::VectorXd u_prev(0);
  const Eigen::MatrixXd a_sfa = Eigen::MatrixXd::Identity(2, 2);

  const ControlProblem a = assemble_control_problem(model, a_sfa, goal, zeta, u_prev);
  Eigen::VectorXd fz(4);
  fz.head(2) = model.extraction.transpose() * zeta.head(4);
  fz.tail(2) = model.extraction.transpose() * zeta.tail(4);
  const ControlProblem b = assemble_control_problem_features(model, a_sfa, goal, fz, u_prev);
  CHECK((a.u_star - b.u_star).norm() <= 1e-12);
  CHECK((a.u_tilde1 - b.u_tilde1).norm() <= 1e-12);
}
