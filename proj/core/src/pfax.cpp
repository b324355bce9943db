#include "slownav/pfax.hpp"

#include <stdexcept>

namespace slownav {
namespace {

Eigen::MatrixXd top_identity(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  m.topLeftCorner(std::min(rows, cols), std::min(rows, cols)).setIdentity();
  return m;
}

// informative directions of <z z^T>: eigenvalues above rel_eps * max
Eigen::MatrixXd kept_basis_of(const Eigen::MatrixXd& zz, double rel_eps, Eigen::Index min_rank) {
  const EigenDecomposition d = symmetric_eig_ascending(zz);
  const double lam_max = d.values.size() ? d.values.maxCoeff() : 0.0;
  if (lam_max <= 0.0) throw std::invalid_argument("pfax: zero-variance signal");
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d.values.size(); ++i)
    if (d.values(i) > rel_eps * lam_max) ++rank;
  if (rank < min_rank)
    throw std::invalid_argument("pfax: fewer informative directions than requested components");
  return d.vectors.rightCols(rank);
}

PfaxModel finish_pfax(const PfaxMoments& m, const Eigen::MatrixXd& residual_cov, int r,
                      double rel_eps) {
  if (r < 1 || r > m.n) throw std::invalid_argument("pfax: invalid component count");
  const Eigen::MatrixXd basis = kept_basis_of(m.zz, rel_eps, r);
  const EigenDecomposition rd =
      symmetric_eig_ascending(basis.transpose() * residual_cov * basis);

  PfaxModel model;
  model.extraction = basis * rd.vectors.leftCols(r);
  model.pfa_eigenvalues = rd.values.head(r);
  model.p = m.p;
  model.q = m.q;
  const PredictorPair bu = fit_predictors(model.extraction, m, rel_eps);
  model.B = bu.B;
  model.U = bu.U;
  return model;
}

}  // namespace

Eigen::MatrixXd residual_covariance(const PfaxMoments& m, const PredictorPair& bu) {
  const Eigen::MatrixXd& B = bu.B;
  const Eigen::MatrixXd& U = bu.U;
  Eigen::MatrixXd r = m.zz;
  r.noalias() -= m.z_zeta * B.transpose();
  r.noalias() -= B * m.z_zeta.transpose();
  r.noalias() -= m.z_mu * U.transpose();
  r.noalias() -= U * m.z_mu.transpose();
  r.noalias() += B * m.zeta_zeta * B.transpose();
  const Eigen::MatrixXd cross = B * m.zeta_mu * U.transpose();
  r += cross + cross.transpose();
  r.noalias() += U * m.mu_mu * U.transpose();
  return 0.5 * (r + r.transpose());
}

LaggedEmbedding lag_embed(const TimeSeries& z, const TimeSeries& u, int p, int q) {
  if (p < 1 || q < 1) throw std::invalid_argument("lag_embed: orders must be >= 1");
  const int maxlag = std::max(p, q);
  // u may cover one step less than z (a control for the final state has no
  // observed successor)
  if (u.len() != z.len() && u.len() != z.len() - 1)
    throw std::invalid_argument("lag_embed: series not aligned");
  const Eigen::Index last = std::min(z.len() - 1, u.len());
  if (last < maxlag)
    throw std::invalid_argument("lag_embed: series shorter than max(p, q) + 1");

  LaggedEmbedding emb;
  emb.p = p;
  emb.q = q;
  emb.n = z.dim();
  emb.nu = u.dim();
  const Eigen::Index count = last - maxlag + 1;
  emb.zeta.resize(count, emb.n * p);
  emb.mu.resize(count, emb.nu * q);
  emb.targets.resize(count, emb.n);
  for (Eigen::Index row = 0; row < count; ++row) {
    const Eigen::Index t = maxlag + row;
    emb.targets.row(row) = z.values.row(t);
    for (int j = 1; j <= p; ++j)
      emb.zeta.block(row, (j - 1) * emb.n, 1, emb.n) = z.values.row(t - j);
    for (int j = 1; j <= q; ++j)
      emb.mu.block(row, (j - 1) * emb.nu, 1, emb.nu) = u.values.row(t - j);
  }
  return emb;
}

PfaxMoments compute_moments(const LaggedEmbedding& emb) {
  PfaxMoments m;
  m.p = emb.p;
  m.q = emb.q;
  m.n = emb.n;
  m.nu = emb.nu;
  m.count = emb.count();
  if (m.count == 0) throw std::invalid_argument("pfax: empty embedding");
  const double c = static_cast<double>(m.count);
  m.zz = emb.targets.transpose() * emb.targets / c;
  m.z_zeta = emb.targets.transpose() * emb.zeta / c;
  m.z_mu = emb.targets.transpose() * emb.mu / c;
  m.zeta_zeta = emb.zeta.transpose() * emb.zeta / c;
  m.zeta_mu = emb.zeta.transpose() * emb.mu / c;
  m.mu_mu = emb.mu.transpose() * emb.mu / c;
  return m;
}

PredictorPair fit_predictors(const Eigen::MatrixXd& a_r, const PfaxMoments& m, double rel_eps) {
  if (a_r.rows() != m.n) throw std::invalid_argument("fit_predictors: extraction dim mismatch");
  const long min_samples = m.n * m.p + m.nu * m.q;
  if (m.count < min_samples)
    throw std::invalid_argument("fit_predictors: too few samples");
  const Eigen::MatrixXd lift = block_diag_lift(a_r, m.p);
  const Eigen::MatrixXd mu_mu_inv = thresholded_pseudo_inverse(m.mu_mu, rel_eps);

  // B(A_r) with the control signal's explained part removed
  const Eigen::MatrixXd zm_mmi = m.z_mu * mu_mu_inv;        // <z mu^T><mu mu^T>^-1
  const Eigen::MatrixXd zem_mmi = m.zeta_mu * mu_mu_inv;    // <zeta mu^T><mu mu^T>^-1
  const Eigen::MatrixXd num = (m.z_zeta - zm_mmi * m.zeta_mu.transpose()) * lift;
  const Eigen::MatrixXd den =
      lift.transpose() * (m.zeta_zeta - zem_mmi * m.zeta_mu.transpose()) * lift;

  PredictorPair bu;
  bu.B = a_r.transpose() * num * thresholded_pseudo_inverse(den, rel_eps);
  bu.U = (a_r.transpose() * m.z_mu - bu.B * lift.transpose() * m.zeta_mu) * mu_mu_inv;
  return bu;
}

PredictorPair fit_predictors(const Eigen::MatrixXd& a_r, const LaggedEmbedding& emb,
                             double rel_eps) {
  return fit_predictors(a_r, compute_moments(emb), rel_eps);
}

Eigen::Vector2d stationarity_residuals(const Eigen::MatrixXd& a_r, const PredictorPair& bu,
                                       const PfaxMoments& m) {
  const Eigen::MatrixXd lift = block_diag_lift(a_r, m.p);
  const Eigen::MatrixXd t1 = a_r.transpose() * m.z_zeta * lift;
  const Eigen::MatrixXd t2 = bu.U * m.zeta_mu.transpose() * lift;
  const Eigen::MatrixXd t3 = bu.B * lift.transpose() * m.zeta_zeta * lift;
  const Eigen::MatrixXd rb = -t1 + t2 + t3;

  const Eigen::MatrixXd s1 = a_r.transpose() * m.z_mu;
  const Eigen::MatrixXd s2 = bu.B * lift.transpose() * m.zeta_mu;
  const Eigen::MatrixXd s3 = bu.U * m.mu_mu;
  const Eigen::MatrixXd ru = -s1 + s2 + s3;

  const double scale_b = std::max({t1.norm(), t2.norm(), t3.norm()});
  const double scale_u = std::max({s1.norm(), s2.norm(), s3.norm()});
  Eigen::Vector2d res;
  res(0) = scale_b > 0 ? rb.norm() / scale_b : rb.norm();
  res(1) = scale_u > 0 ? ru.norm() / scale_u : ru.norm();
  return res;
}

PfaxModel train_pfax(const LaggedEmbedding& emb, int r, double rel_eps) {
  const PfaxMoments m = compute_moments(emb);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m.n, m.n);
  const PredictorPair full = fit_predictors(eye, m, rel_eps);

  // direct residual covariance of the full one-step predictor
  Eigen::MatrixXd resid = emb.targets;
  resid.noalias() -= emb.zeta * full.B.transpose();
  resid.noalias() -= emb.mu * full.U.transpose();
  const Eigen::MatrixXd rcov =
      resid.transpose() * resid / static_cast<double>(emb.count());
  return finish_pfax(m, rcov, r, rel_eps);
}

PfaxModel train_pfax_from_moments(const PfaxMoments& m, int r, double rel_eps) {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m.n, m.n);
  const PredictorPair full = fit_predictors(eye, m, rel_eps);
  return finish_pfax(m, residual_covariance(m, full), r, rel_eps);
}

IteratedPredictor fit_iterated_predictor(const LaggedEmbedding& emb, int k, double rel_eps) {
  if (k < 0) throw std::invalid_argument("iterated predictor: k must be >= 0");
  const PfaxMoments m = compute_moments(emb);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m.n, m.n);
  const PredictorPair full = fit_predictors(eye, m, rel_eps);

  IteratedPredictor pred;
  pred.B_full = full.B;
  pred.U_full = full.U;
  pred.horizon = k;
  pred.p = m.p;
  pred.q = m.q;
  pred.n = m.n;
  pred.nu = m.nu;

  const Eigen::Index np = m.n * m.p;
  const Eigen::Index count = emb.count();
  if (count < 2) throw std::invalid_argument("iterated predictor: embedding too short");
  const Eigen::MatrixXd zeta_next_zeta = emb.zeta.bottomRows(count - 1).transpose() *
                                         emb.zeta.topRows(count - 1) /
                                         static_cast<double>(count - 1);
  const Eigen::MatrixXd lift_in = top_identity(np, m.n);
  pred.V = (zeta_next_zeta - lift_in * full.U * m.zeta_mu.transpose()) *
           thresholded_pseudo_inverse(m.zeta_zeta, rel_eps);
  return pred;
}

Eigen::VectorXd iterated_prediction(const IteratedPredictor& pred, const LaggedEmbedding& emb,
                                    Eigen::Index target_row, int i) {
  if (i < 0 || target_row - i < 0 || target_row >= emb.count())
    throw std::out_of_range("iterated_prediction: row/horizon out of range");
  const Eigen::Index np = pred.n * pred.p;
  const Eigen::MatrixXd lift_in = top_identity(np, pred.n);

  Eigen::VectorXd zeta_i = emb.zeta.row(target_row - i).transpose();
  for (int s = 0; s < i; ++s) zeta_i = pred.V * zeta_i;
  Eigen::VectorXd out = pred.B_full * zeta_i;

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(np);
  for (int j = 0; j <= i; ++j) {
    Eigen::VectorXd term = lift_in * (pred.U_full * emb.mu.row(target_row - j).transpose());
    for (int s = 0; s < j; ++s) term = pred.V * term;
    acc += term;
  }
  out += lift_in.transpose() * acc;
  return out;
}

PfaxModel train_pfax_iterated(const LaggedEmbedding& emb, int r, int k, double rel_eps) {
  if (k == 0) return train_pfax(emb, r, rel_eps);
  const PfaxMoments m = compute_moments(emb);
  const IteratedPredictor pred = fit_iterated_predictor(emb, k, rel_eps);

  const Eigen::Index count = emb.count();
  if (count <= k) throw std::invalid_argument("pfax iterated: embedding shorter than horizon");
  const Eigen::Index rows = count - k;
  const Eigen::Index np = m.n * m.p;
  const Eigen::MatrixXd lift_in = top_identity(np, m.n);

  // power table of V
  std::vector<Eigen::MatrixXd> vpow(static_cast<size_t>(k) + 1);
  vpow[0] = Eigen::MatrixXd::Identity(np, np);
  for (int i = 1; i <= k; ++i) vpow[i] = pred.V * vpow[i - 1];

  Eigen::MatrixXd rsum = Eigen::MatrixXd::Zero(m.n, m.n);
  const Eigen::MatrixXd targets = emb.targets.bottomRows(rows);
  for (int i = 0; i <= k; ++i) {
    Eigen::MatrixXd zhat =
        emb.zeta.middleRows(k - i, rows) * (pred.B_full * vpow[i]).transpose();
    for (int j = 0; j <= i; ++j) {
      const Eigen::MatrixXd map =
          lift_in.transpose() * vpow[j] * lift_in * pred.U_full;  // n x (nu*q)
      zhat.noalias() += emb.mu.middleRows(k - j, rows) * map.transpose();
    }
    const Eigen::MatrixXd resid = targets - zhat;
    rsum.noalias() += resid.transpose() * resid / static_cast<double>(rows);
  }
  return finish_pfax(m, rsum, r, rel_eps);
}

PfaxModel proxy_from_sfa(const SfaModel& sfa, const PfaxMoments& m, double rel_eps) {
  if (sfa.extraction.rows() != m.n)
    throw std::invalid_argument("proxy_from_sfa: extraction dim mismatch");
  PfaxModel model;
  model.extraction = sfa.extraction;
  model.p = m.p;
  model.q = m.q;
  model.proxy_mode = true;
  const PredictorPair bu = fit_predictors(model.extraction, m, rel_eps);
  model.B = bu.B;
  model.U = bu.U;

  // reduced residual covariance of the fitted feature predictor
  const Eigen::MatrixXd lift = block_diag_lift(model.extraction, m.p);
  const Eigen::MatrixXd mzz = model.extraction.transpose() * m.zz * model.extraction;
  const Eigen::MatrixXd mzzeta = model.extraction.transpose() * m.z_zeta * lift;
  const Eigen::MatrixXd mzmu = model.extraction.transpose() * m.z_mu;
  Eigen::MatrixXd rm = mzz;
  rm.noalias() -= mzzeta * model.B.transpose();
  rm.noalias() -= model.B * mzzeta.transpose();
  rm.noalias() -= mzmu * model.U.transpose();
  rm.noalias() -= model.U * mzmu.transpose();
  rm.noalias() += model.B * (lift.transpose() * m.zeta_zeta * lift) * model.B.transpose();
  const Eigen::MatrixXd cross = model.B * (lift.transpose() * m.zeta_mu) * model.U.transpose();
  rm += cross + cross.transpose();
  rm.noalias() += model.U * m.mu_mu * model.U.transpose();
  const EigenDecomposition rd = symmetric_eig_ascending(rm);
  model.pfa_eigenvalues = rd.values;
  return model;
}

PfaxModel proxy_from_sfa(const SfaModel& sfa, const LaggedEmbedding& emb, double rel_eps) {
  return proxy_from_sfa(sfa, compute_moments(emb), rel_eps);
}

Eigen::VectorXd predict_next(const PfaxModel& model, const Eigen::VectorXd& zeta_row,
                             const Eigen::VectorXd& mu_row) {
  const Eigen::Index n = model.extraction.rows();
  if (zeta_row.size() != n * model.p)
    throw std::invalid_argument("predict_next: zeta width mismatch");
  Eigen::VectorXd fz(model.r() * model.p);
  for (int j = 0; j < model.p; ++j)
    fz.segment(j * model.r(), model.r()) =
        model.extraction.transpose() * zeta_row.segment(j * n, n);
  return predict_from_features(model, fz, mu_row);
}

Eigen::VectorXd predict_from_features(const PfaxModel& model,
                                      const Eigen::VectorXd& feature_zeta,
                                      const Eigen::VectorXd& mu_row) {
  if (feature_zeta.size() != model.B.cols())
    throw std::invalid_argument("predict: feature history width mismatch");
  if (mu_row.size() != model.U.cols())
    throw std::invalid_argument("predict: control history width mismatch");
  return model.B * feature_zeta + model.U * mu_row;
}

}  // namespace slownav
