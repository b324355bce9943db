#pragma once

#include <Eigen/Core>

#include "slownav/linalg.hpp"
#include "slownav/moments.hpp"
#include "slownav/sfa.hpp"
#include "slownav/time_series.hpp"

namespace slownav {

// Stacked recent history of the state and control signals:
//   zeta(t) = vec(z(t-1), ..., z(t-p)), most recent block first
//   mu(t)   = vec(u(t-1), ..., u(t-q))
// Rows exist only where the full history is available; targets are the
// aligned z(t) rows.
struct LaggedEmbedding {
  Eigen::MatrixXd zeta;     // count x (n*p)
  Eigen::MatrixXd mu;       // count x (nu*q)
  Eigen::MatrixXd targets;  // count x n
  int p = 1, q = 1;
  Eigen::Index n = 0, nu = 0;

  Eigen::Index count() const { return targets.rows(); }
};

LaggedEmbedding lag_embed(const TimeSeries& z, const TimeSeries& u, int p, int q);

// Raw second moments over the common target window.
struct PfaxMoments {
  Eigen::MatrixXd zz;         // <z z^T>
  Eigen::MatrixXd z_zeta;     // <z zeta^T>
  Eigen::MatrixXd z_mu;       // <z mu^T>
  Eigen::MatrixXd zeta_zeta;  // <zeta zeta^T>
  Eigen::MatrixXd zeta_mu;    // <zeta mu^T>
  Eigen::MatrixXd mu_mu;      // <mu mu^T>
  long count = 0;
  int p = 1, q = 1;
  Eigen::Index n = 0, nu = 0;
};

PfaxMoments compute_moments(const LaggedEmbedding& emb);

// Least-squares prediction matrices for a fixed extraction A_r:
//   B(A_r): r x (r*p), U(A_r): r x (nu*q)
// computed from the explicit closed form, with every inversion replaced by
// the thresholded pseudo-inverse.
struct PredictorPair {
  Eigen::MatrixXd B, U;
};

PredictorPair fit_predictors(const Eigen::MatrixXd& a_r, const PfaxMoments& m,
                             double rel_eps = kDefaultEigenFloor);
PredictorPair fit_predictors(const Eigen::MatrixXd& a_r, const LaggedEmbedding& emb,
                             double rel_eps = kDefaultEigenFloor);

// Frobenius norms of the two stationarity conditions at (B, U), relative to
// the scale of their constituent moment matrices. Both vanish at the closed
// form.
Eigen::Vector2d stationarity_residuals(const Eigen::MatrixXd& a_r, const PredictorPair& bu,
                                       const PfaxMoments& m);

// <(z - B zeta - U mu)(z - B zeta - U mu)^T> from moments, symmetrized.
Eigen::MatrixXd residual_covariance(const PfaxMoments& m, const PredictorPair& bu);

struct PfaxModel {
  Eigen::MatrixXd extraction;       // n x r
  Eigen::MatrixXd B;                // r x (r*p)
  Eigen::MatrixXd U;                // r x (nu*q)
  int p = 1, q = 1;
  Eigen::VectorXd pfa_eigenvalues;  // prediction-error eigenvalues, ascending
  bool proxy_mode = false;

  Eigen::Index r() const { return extraction.cols(); }
  Eigen::Index nu() const { return q > 0 ? U.cols() / q : 0; }
};

// Extraction by predictability: diagonalizes the one-step residual
// covariance of the full linear predictor and keeps the r smallest
// eigendirections, then refits B and U for that extraction.
PfaxModel train_pfax(const LaggedEmbedding& emb, int r,
                     double rel_eps = kDefaultEigenFloor);
PfaxModel train_pfax_from_moments(const PfaxMoments& m, int r,
                                  double rel_eps = kDefaultEigenFloor);

// Iterated variant: diagonalizes the sum over horizons i = 0..k of the
// residual covariances of the iterated predictors; k = 0 reproduces
// train_pfax exactly.
PfaxModel train_pfax_iterated(const LaggedEmbedding& emb, int r, int k,
                              double rel_eps = kDefaultEigenFloor);

// SFA extraction reused as the predictable-feature extraction, with B and U
// fitted for it.
PfaxModel proxy_from_sfa(const SfaModel& sfa, const LaggedEmbedding& emb,
                         double rel_eps = kDefaultEigenFloor);
PfaxModel proxy_from_sfa(const SfaModel& sfa, const PfaxMoments& m,
                         double rel_eps = kDefaultEigenFloor);

// One-step prediction m_hat(t) = B vec(A_r^T z(t-1..t-p)) + U mu(t) from
// z-space histories.
Eigen::VectorXd predict_next(const PfaxModel& model, const Eigen::VectorXd& zeta_row,
                             const Eigen::VectorXd& mu_row);

// Same prediction from feature-space histories vec(m(t-1..t-p)).
Eigen::VectorXd predict_from_features(const PfaxModel& model,
                                      const Eigen::VectorXd& feature_zeta,
                                      const Eigen::VectorXd& mu_row);

// Full-rank autoregressive map V predicting zeta(t+1) from zeta(t), plus the
// full-dimension predictor pair it is built from.
struct IteratedPredictor {
  Eigen::MatrixXd V;       // (n*p) x (n*p)
  Eigen::MatrixXd B_full;  // n x (n*p)
  Eigen::MatrixXd U_full;  // n x (nu*q)
  int horizon = 0;
  int p = 1, q = 1;
  Eigen::Index n = 0, nu = 0;
};

IteratedPredictor fit_iterated_predictor(const LaggedEmbedding& emb, int k,
                                         double rel_eps = kDefaultEigenFloor);

// z_hat^(i)(t) for a target row index (relative to the embedding); rows with
// t - i out of range are rejected.
Eigen::VectorXd iterated_prediction(const IteratedPredictor& pred, const LaggedEmbedding& emb,
                                    Eigen::Index target_row, int i);

}  // namespace slownav
