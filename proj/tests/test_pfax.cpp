#include <doctest.h>

#include <cmath>

#include "slownav/pfax.hpp"
#include "slownav/rng.hpp"
#include "slownav/sphering.hpp"

using namespace slownav;

namespace {

// objective of the least-squares predictor fit, straight from the embedding
double predictor_objective(const LaggedEmbedding& emb, const Eigen::MatrixXd& a_r,
                           const Eigen::MatrixXd& B, const Eigen::MatrixXd& U) {
  const Eigen::MatrixXd lift = block_diag_lift(a_r, emb.p);
  const Eigen::MatrixXd resid =
      emb.targets * a_r - emb.zeta * lift * B.transpose() - emb.mu * U.transpose();
  return resid.squaredNorm() / static_cast<double>(emb.count());
}

LaggedEmbedding ar1_embedding(double coeff, Eigen::Index len, std::uint64_t seed) {
  SplitMix64 rng(seed);
  TimeSeries z;
  z.values.resize(len, 1);
  double x = 0.0;
  for (Eigen::Index t = 0; t < len; ++t) {
    x = coeff * x + rng.normal();
    z.values(t, 0) = x;
  }
  TimeSeries u;
  u.values = Eigen::MatrixXd::Zero(len, 1);
  return lag_embed(z, u, 1, 1);
}

}  // namespace

TEST_CASE("an AR(1) process recovers its coefficient") {
  const LaggedEmbedding emb = ar1_embedding(0.9, 40000, 5);
  const PredictorPair bu = fit_predictors(Eigen::MatrixXd::Identity(1, 1), emb);

  // Yule-Walker oracle on the same data
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < emb.count(); ++i) {
    num += emb.targets(i, 0) * emb.zeta(i, 0);
    den += emb.zeta(i, 0) * emb.zeta(i, 0);
  }
  const double oracle = num / den;
  CHECK(std::abs(bu.B(0, 0) - oracle) <= 1e-9);
  CHECK(std::abs(bu.B(0, 0) - 0.9) <= 0.02);
  CHECK(bu.U.cwiseAbs().maxCoeff() <= 1e-12);  // u carries nothing
}

TEST_CASE("a control-driven identity system is fitted exactly") {
  SplitMix64 rng(7);
  const Eigen::Index len = 2000;
  TimeSeries u;
  u.values.resize(len, 2);
  for (Eigen::Index t = 0; t < len; ++t)
    u.values.row(t) << rng.uniform(-1, 1), rng.uniform(-1, 1);
  TimeSeries z;
  z.values.resize(len, 2);
  z.values.row(0).setZero();
  for (Eigen::Index t = 1; t < len; ++t) z.values.row(t) = u.values.row(t - 1);

  const LaggedEmbedding emb = lag_embed(z, u, 1, 1);
  const PredictorPair bu = fit_predictors(Eigen::MatrixXd::Identity(2, 2), emb);
  CHECK((bu.U - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(predictor_objective(emb, Eigen::MatrixXd::Identity(2, 2), bu.B, bu.U) <= 1e-10);

  SUBCASE("predict_next reproduces the control") {
    const PfaxModel model = train_pfax(emb, 2);
    for (const Eigen::Index row : {Eigen::Index(10), Eigen::Index(500)}) {
      const Eigen::VectorXd pred =
          predict_next(model, emb.zeta.row(row).transpose(), emb.mu.row(row).transpose());
      const Eigen::VectorXd truth = model.extraction.transpose() *
                                    Eigen::VectorXd(emb.targets.row(row).transpose());
      CHECK((pred - truth).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("the closed form is a stationary point of the objective") {
  const LaggedEmbedding emb = ar1_embedding(0.7, 3000, 11);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(1, 1);
  const PredictorPair bu = fit_predictors(eye, emb);
  const double base = predictor_objective(emb, eye, bu.B, bu.U);

  SplitMix64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd db(1, 1), du(1, 1);
    db << rng.normal();
    du << rng.normal();
    db *= 1e-3 / db.norm();
    du *= 1e-3 / du.norm();
    CHECK(predictor_objective(emb, eye, bu.B + db, bu.U) >= base);
    CHECK(predictor_objective(emb, eye, bu.B, bu.U + du) >= base);
  }

  const Eigen::Vector2d res = stationarity_residuals(eye, bu, compute_moments(emb));
  CHECK(res(0) <= 1e-10);
  CHECK(res(1) <= 1e-10);
}

TEST_CASE("gradient descent never beats the closed form") {
  SplitMix64 rng(29);
  for (int instance = 0; instance < 20; ++instance) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);   // 2..4
    const int p = 1 + static_cast<int>(rng.next_u64() % 2);
    const int q = 1 + static_cast<int>(rng.next_u64() % 2);
    const Eigen::Index len = 500;
    TimeSeries z, u;
    z.values.resize(len, n);
    u.values.resize(len, 2);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(n);
    for (Eigen::Index t = 0; t < len; ++t) {
      for (int c = 0; c < 2; ++c) u.values(t, c) = rng.uniform(-1, 1);
      for (int c = 0; c < n; ++c)
        state(c) = 0.5 * state(c) + 0.3 * u.values(t, (c + 1) % 2) + 0.2 * rng.normal();
      z.values.row(t) = state.transpose();
    }
    const LaggedEmbedding emb = lag_embed(z, u, p, q);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    const PredictorPair best = fit_predictors(eye, emb);
    const double closed = predictor_objective(emb, eye, best.B, best.U);

    // plain gradient descent from a random start
    const PfaxMoments m = compute_moments(emb);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n * p);
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, 2 * q);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = 0.1 * rng.normal();
    for (Eigen::Index i = 0; i < U.size(); ++i) U.data()[i] = 0.1 * rng.normal();
    const double lr = 0.05;
    for (int it = 0; it < 4000; ++it) {
      const Eigen::MatrixXd gb =
          -m.z_zeta + U * m.zeta_mu.transpose() + B * m.zeta_zeta;
      const Eigen::MatrixXd gu = -m.z_mu + B * m.zeta_mu + U * m.mu_mu;
      B -= lr * gb;
      U -= lr * gu;
    }
    const double descended = predictor_objective(emb, eye, B, U);
    CHECK(descended >= closed - 1e-6 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("predictability extraction separates signal from noise") {
  SplitMix64 rng(31);
  const Eigen::Index len = 6000;
  TimeSeries z, u;
  z.values.resize(len, 2);
  u.values = Eigen::MatrixXd::Zero(len, 1);
  for (Eigen::Index t = 0; t < len; ++t) {
    z.values(t, 0) = std::cos(0.05 * static_cast<double>(t));  // AR(2)-predictable
    z.values(t, 1) = rng.normal();                             // white noise
  }
  const LaggedEmbedding emb = lag_embed(z, u, 2, 1);
  const PfaxModel model = train_pfax(emb, 1);
  CHECK(std::abs(model.extraction(0, 0)) >= 0.999);
  CHECK(model.pfa_eigenvalues(0) <= 1e-8);

  SUBCASE("full extraction preserves the residual trace") {
    const PfaxModel full = train_pfax(emb, 2);
    const PredictorPair bu =
        fit_predictors(Eigen::MatrixXd::Identity(2, 2), emb);
    Eigen::MatrixXd resid = emb.targets - emb.zeta * bu.B.transpose() - emb.mu * bu.U.transpose();
    const double trace = resid.squaredNorm() / static_cast<double>(emb.count());
    CHECK(full.pfa_eigenvalues.sum() == doctest::Approx(trace).epsilon(1e-10));
    CHECK(full.pfa_eigenvalues(0) <= full.pfa_eigenvalues(1));
  }
}

TEST_CASE("extraction beats any fixed direction on prediction error") {
  TimeSeries z2, u2;
  SplitMix64 rng(41);
  z2.values.resize(4000, 2);
  u2.values = Eigen::MatrixXd::Zero(4000, 1);
  double slow = 0;
  for (Eigen::Index t = 0; t < 4000; ++t) {
    slow = 0.95 * slow + 0.3 * rng.normal();
    z2.values.row(t) << slow, rng.normal();
  }
  const LaggedEmbedding emb2 = lag_embed(z2, u2, 1, 1);
  const PfaxModel model = train_pfax(emb2, 1);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd dir(2, 1);
    dir << rng.normal(), rng.normal();
    dir /= dir.norm();
    const PredictorPair bu = fit_predictors(dir, emb2);
    CHECK(model.pfa_eigenvalues(0) <= predictor_objective(emb2, dir, bu.B, bu.U) + 1e-9);
  }
}

TEST_CASE("iterated training at k = 0 is the plain training") {
  const LaggedEmbedding emb = ar1_embedding(0.9, 3000, 43);
  const PfaxModel plain = train_pfax(emb, 1);
  const PfaxModel iter = train_pfax_iterated(emb, 1, 0);
  CHECK((plain.pfa_eigenvalues - iter.pfa_eigenvalues).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((plain.extraction - iter.extraction).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("the autoregressive map V recovers the AR coefficient") {
  const LaggedEmbedding emb = ar1_embedding(0.9, 40000, 47);
  const IteratedPredictor pred = fit_iterated_predictor(emb, 2);
  CHECK(std::abs(pred.V(0, 0) - 0.9) <= 0.02);

  SUBCASE("horizon-0 prediction matches the one-step predictor") {
    for (const Eigen::Index row : {Eigen::Index(5), Eigen::Index(100)}) {
      const Eigen::VectorXd direct = pred.B_full * emb.zeta.row(row).transpose() +
                                     pred.U_full * emb.mu.row(row).transpose();
      CHECK((iterated_prediction(pred, emb, row, 0) - direct).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("the summed residual covariance stays positive semi-definite") {
    const PfaxModel model = train_pfax_iterated(emb, 1, 2);
    CHECK(model.pfa_eigenvalues.minCoeff() >= -1e-10);
  }
}

TEST_CASE("streaming moments match the in-memory embedding") {
  SplitMix64 rng(53);
  const Eigen::Index len = 700;
  TimeSeries z, u;
  z.values.resize(len, 3);
  u.values.resize(len - 1, 2);
  for (Eigen::Index t = 0; t < len; ++t)
    for (int c = 0; c < 3; ++c) z.values(t, c) = rng.normal();
  for (Eigen::Index t = 0; t + 1 < len; ++t)
    for (int c = 0; c < 2; ++c) u.values(t, c) = rng.uniform(-1, 1);

  for (const auto& [p, q] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {1, 3}, {2, 2}}) {
    const PfaxMoments direct = compute_moments(lag_embed(z, u, p, q));
    LaggedMomentAccumulator acc(3, 2, p, q);
    acc.set_mean(Eigen::VectorXd::Zero(3));
    // deliberately awkward chunk size to exercise the history carry
    for (Eigen::Index start = 0; start < len; start += 97) {
      const Eigen::Index m = std::min<Eigen::Index>(97, len - start);
      const Eigen::Index ustart = std::min<Eigen::Index>(start, u.values.rows());
      const Eigen::Index um =
          std::max<Eigen::Index>(0, std::min<Eigen::Index>(m, u.values.rows() - ustart));
      acc.add(z.values.middleRows(start, m), u.values.middleRows(ustart, um));
    }
    CHECK(acc.target_count() == direct.count);
    CHECK((acc.lag(0, 0) - direct.zz).cwiseAbs().maxCoeff() <= 1e-12);
    for (int j = 1; j <= p; ++j)
      CHECK((acc.lag(0, j) - direct.z_zeta.middleCols((j - 1) * 3, 3)).cwiseAbs().maxCoeff() <=
            1e-12);
    for (int j = 1; j <= p; ++j)
      for (int k = 1; k <= p; ++k)
        CHECK((acc.lag(j, k) - direct.zeta_zeta.block((j - 1) * 3, (k - 1) * 3, 3, 3))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
    for (int k = 1; k <= q; ++k)
      CHECK((acc.hu(0, k) - direct.z_mu.middleCols((k - 1) * 2, 2)).cwiseAbs().maxCoeff() <=
            1e-12);
    for (int j = 1; j <= q; ++j)
      for (int k = 1; k <= q; ++k)
        CHECK((acc.uu(j, k) - direct.mu_mu.block((j - 1) * 2, (k - 1) * 2, 2, 2))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("proxy predictors satisfy the same stationarity conditions") {
  SplitMix64 rng(59);
  const Eigen::Index len = 5000;
  TimeSeries raw, u;
  raw.values.resize(len, 3);
  u.values.resize(len, 2);
  Eigen::Vector3d state = Eigen::Vector3d::Zero();
  for (Eigen::Index t = 0; t < len; ++t) {
    u.values.row(t) << rng.uniform(-1, 1), rng.uniform(-1, 1);
    state(0) = 0.9 * state(0) + 0.2 * u.values(t, 0);
    state(1) = 0.6 * state(1) + 0.2 * u.values(t, 1) + 0.05 * rng.normal();
    state(2) = rng.normal();
    raw.values.row(t) = state.transpose();
  }
  const SpheringTransform sph = fit_sphering(raw);
  const TimeSeries z = apply_sphering(sph, raw);
  const SfaModel sfa = train_sfa(z, 2);
  const LaggedEmbedding emb = lag_embed(z, u, 1, 1);
  const PfaxModel proxy = proxy_from_sfa(sfa, emb);
  CHECK(proxy.proxy_mode);
  CHECK((proxy.extraction - sfa.extraction).norm() == 0.0);

  const Eigen::Vector2d res =
      stationarity_residuals(proxy.extraction, {proxy.B, proxy.U}, compute_moments(emb));
  CHECK(res(0) <= 1e-6);
  CHECK(res(1) <= 1e-6);

  SUBCASE("prediction linearity and the zero fixed point") {
    const Eigen::VectorXd zero =
        predict_next(proxy, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2));
    CHECK(zero.norm() == 0.0);
    Eigen::VectorXd zeta(3), mu(2);
    zeta << 0.3, -0.2, 0.9;
    mu << 0.5, -0.1;
    const Eigen::VectorXd one = predict_next(proxy, zeta, mu);
    const Eigen::VectorXd two = predict_next(proxy, Eigen::VectorXd(2.0 * zeta),
                                             Eigen::VectorXd(2.0 * mu));
    CHECK((two - 2.0 * one).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
